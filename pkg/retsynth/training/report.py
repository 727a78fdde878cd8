"""per-step metric series recorded by every training loop"""

from dataclasses import dataclass, field
import numpy as np
import pandas as pd
from ..shared.errors import ContractError


@dataclass
class TrainReport:
    """loss series keyed by name, wall time and the final parameter checksum

    `index_name` labels the series position (step or epoch) in the CSV rows;
    `extra` holds scalar results such as held-out PSNR or the best epoch.
    """

    series: dict = field(default_factory=dict)
    wall_time: float = 0.0
    checksum: str = ""
    index_name: str = "step"
    extra: dict = field(default_factory=dict)

    def record(self, **values):
        for name, value in values.items():
            self.series.setdefault(name, []).append(float(value))

    def __len__(self):
        lengths = {len(values) for values in self.series.values()}
        return lengths.pop() if lengths else 0

    def validate(self):
        """all series have the same length and hold finite values"""
        lengths = {name: len(values) for name, values in self.series.items()}
        if len(set(lengths.values())) > 1:
            raise ContractError(f"report series lengths differ: {lengths}")
        for name, values in self.series.items():
            if not np.all(np.isfinite(values)):
                raise ContractError(f"report series {name} holds non-finite values")
        return self

    def to_frame(self):
        """one row per step/epoch, one column per series"""
        self.validate()
        df = pd.DataFrame(self.series)
        df.insert(0, self.index_name, np.arange(len(df)))
        return df
