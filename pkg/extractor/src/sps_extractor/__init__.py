"""Model-side extractor for the spectral scoring pipeline.

Dumps a model's representation matrix, per-candidate penultimate-layer token
states with log-probs, and probe-position hidden states into the .spsf +
manifest interchange format consumed by the scoring package.
"""

from .errors import JobError
from .jobs import DecodeSettings, ExtractionJob, dump_candidates, dump_probe_states, dump_weights
from .models import ByteTokenizer, load_bundle, make_tiny_model, resolve_layer

__version__ = "0.1.0"
