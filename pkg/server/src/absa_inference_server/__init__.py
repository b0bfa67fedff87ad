from .app import create_app
from .engine import MlmEngine, ModelSpec, Seq2SeqEngine, load_engine

__all__ = ["create_app", "ModelSpec", "Seq2SeqEngine", "MlmEngine", "load_engine"]

__version__ = "0.1.0"
