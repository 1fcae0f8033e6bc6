"""pocsmith: staged multi-agent synthesis of microarchitectural attack PoCs."""

__version__ = "0.1.0"
