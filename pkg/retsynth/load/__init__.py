"""checkpoint persistence for networks and training counters"""

from .checkpoint import load_checkpoint, read_checkpoint, restore_checkpoint, save_checkpoint

__all__ = ["load_checkpoint", "read_checkpoint", "restore_checkpoint", "save_checkpoint"]
