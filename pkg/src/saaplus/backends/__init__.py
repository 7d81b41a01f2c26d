from .base import BackendDescriptor, BackendSet, FeatureExtractor, GeneratorBackend, RefinerBackend
from .oracle import FixtureEntry, GridFeatureExtractor, OracleFixture, OracleGenerator, OracleRefiner
from .remote import RemoteFeatureExtractor, RemoteGenerator, RemoteRefiner

__all__ = [
    "BackendDescriptor",
    "BackendSet",
    "FeatureExtractor",
    "FixtureEntry",
    "GeneratorBackend",
    "GridFeatureExtractor",
    "OracleFixture",
    "OracleGenerator",
    "OracleRefiner",
    "RefinerBackend",
    "RemoteFeatureExtractor",
    "RemoteGenerator",
    "RemoteRefiner",
]
