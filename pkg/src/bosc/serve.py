"""Module runner: ``python -m bosc.serve`` (configured via BOSC_* env vars).

Recognized variables: BOSC_HOST, BOSC_PORT, BOSC_DATA_ROOT, BOSC_LOG_LEVEL,
BOSC_OVERLAY_ALPHA, BOSC_STATIC_DIR.
"""

from .service import config_from_env, serve

if __name__ == "__main__":
    serve(config_from_env())
