"""Complex variational mode decomposition and emitter-fingerprint experiments.

Layer map:

* signals / modulation / pa -- synthesize complex baseband waveforms and
  imprint per-emitter amplifier distortion
* vmd                        -- real-signal variational mode decomposition
* analytic / decompose       -- two-sided complex extension with mode labeling
* nn                         -- toy temporal-conv classifier, exact gradients
* iqfile / dataset           -- on-disk format and dataset simulation
* features / classify        -- fixed-layout features and nearest-centroid
* fewshot / cli              -- experiment drivers
"""

from .errors import DegenerateInputError, ParameterError
from .signals import ComplexSignal, add_awgn, normalize_power

__all__ = [
    "ComplexSignal",
    "DegenerateInputError",
    "ParameterError",
    "add_awgn",
    "normalize_power",
]

__version__ = "0.1.0"
