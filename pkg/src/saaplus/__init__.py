"""Prompt-regularized zero-shot anomaly segmentation.

A cascade of a prompt-guided box detector and a box-prompted mask refiner,
regularized by four prompt families (expert language, object properties,
image saliency, confidence top-K), with deterministic oracle backends, an
evaluation harness, a CLI and an HTTP service.
"""

__version__ = "0.1.0"
