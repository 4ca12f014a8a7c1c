"""Three-party BB84 conference key agreement simulator with CSS identity checks."""
from confqkd.kernels import BACKEND
from confqkd.protocol import Aborted, Completed, SessionConfig, replay_session, run_session

__version__ = "0.1.0"

__all__ = ["BACKEND", "Aborted", "Completed", "SessionConfig", "replay_session", "run_session"]
