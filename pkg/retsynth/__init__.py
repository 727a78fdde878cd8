"""retsynth: synthesize retinal symptom images and verify them with a CAM-compatible classifier"""

__version__ = "0.1.0"
