"""Early design-time power and performance estimation for CNN inference on GPGPUs."""

__version__ = "0.1.0"

# Version of the predictor feature schema; bumped whenever feature names or
# their order change. Trained models record the schema they were fit on.
SCHEMA_VERSION = "1"
