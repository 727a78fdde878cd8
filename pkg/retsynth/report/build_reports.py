"""builds the html run report from the csv files and images written by other commands"""

from datetime import datetime
from io import StringIO
import logging
from pathlib import Path
from textwrap import wrap
import hvplot
import jinja2
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # pylint: disable=wrong-import-position
import pandas as pd  # pylint: disable=wrong-import-position
from ..extract.codec import load_image  # pylint: disable=wrong-import-position
from ..shared.errors import ConfigurationError  # pylint: disable=wrong-import-position
from ..shared.utils import ensure_dir  # pylint: disable=wrong-import-position

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).resolve().parent / "templates"
IMAGE_SUFFIXES = {".ppm", ".pgm"}
LOSS_TABLES = ("train_gan", "train_wgan", "train_classifier", "train_ae")


def query_dataframe(df, column=None, single_value=True, **kwargs):
    """filters a dataframe on column == value pairs and returns a column of the result"""
    mask = pd.Series(True, index=df.index)
    for kwarg, val in kwargs.items():
        mask &= df[kwarg] == val
    res = df[mask]

    if single_value is True:
        assert len(res) == 1, f"query result should have 1 row, got {len(res)}. params were {kwargs}"
        assert column is not None, "must pass a column to obtain a single value"
        return res.iloc[0][column]

    if column is None:
        return res
    return res[column]


def format_pct(pct):
    """formats probabilities as percentages"""
    if not isinstance(pct, (int, float)):
        raise TypeError(f"cannot format {type(pct)} value {pct}")

    return round(pct * 100, 1)


def word_wrap_title(title):
    """accomodates long titles by breaking at 60 characters"""
    return "\n".join(wrap(title, 60))


def get_hvplot_html(plot_output):
    """returns the html output of pandas.plot with backend='hvplot' as str"""
    string_io = StringIO()
    hvplot.save(plot_output, string_io)
    return string_io.getvalue()


def get_table_html(df, pct_cols=(), **kwargs):
    """runs dataframe.to_html with percent columns formatted"""
    df = df.copy()
    for col in pct_cols:
        if col in df.columns:
            df[col] = df[col].map(lambda val: f"{format_pct(float(val))}%")

    df.columns = [str(col).replace("_", " ") for col in df.columns]
    return df.to_html(**kwargs)


def to_display(image):
    """C x H x W in [-1, 1] to H x W (x 3) in [0, 1] for imshow"""
    unit = (image + 1.0) / 2.0
    return unit[0] if unit.shape[0] == 1 else unit.transpose(1, 2, 0)


class Report:
    """collects the outputs of one or more run directories into a single html page

    Csv files with the same name in different run directories are stacked, so
    a verification table can be assembled from separate verify runs.
    """

    def __init__(self, input_dirs, output_dir, title="Retinal image synthesis report", max_images=16):
        self.input_dirs = [Path(path) for path in input_dirs]
        missing = [str(path) for path in self.input_dirs if not path.is_dir()]
        if missing:
            raise ConfigurationError(f"report inputs are not directories: {missing}")

        env = jinja2.Environment(
            loader=jinja2.FileSystemLoader(str(TEMPLATE_DIR)),
            undefined=jinja2.StrictUndefined,
            autoescape=False,
        )
        self.template = env.get_template("base.j2")
        self.output_dir = ensure_dir(output_dir)
        self.svg_dir = ensure_dir(self.output_dir / "svgs")
        self.title = title
        self.max_images = max_images
        self.run_timestamp = datetime.now().strftime("%Y-%m-%d at %H:%M %p")
        self.tables = {}
        self.load_csv_files()

    def __enter__(self):
        return self

    def __exit__(self, *args, **kwargs):
        plt.close("all")

    def load_csv_files(self):
        """reads every csv of the input directories, stacking files with the same stem"""
        frames = {}
        for input_dir in self.input_dirs:
            for path in sorted(input_dir.glob("*.csv")):
                if path.stem == "manifest":
                    continue
                frames.setdefault(path.stem, []).append(pd.read_csv(path))
        self.tables = {stem: pd.concat(dfs, ignore_index=True) for stem, dfs in frames.items()}
        logger.info("report inputs: %s", {stem: len(df) for stem, df in self.tables.items()})

    def verification_section(self):
        if "verification" not in self.tables:
            return None
        df = self.tables["verification"]
        pivot = df.pivot_table(index="source", columns="class_group", values="value", aggfunc="mean")
        order = [source for source in ("real", "wgan", "dcgan", "styletransfer") if source in pivot.index]
        pivot = pivot.loc[order].rename(index=str.title)
        pivot.index.name = None
        return {
            "pivot_html": get_table_html(pivot, pct_cols=list(pivot.columns)),
            "detail_html": get_table_html(df, pct_cols=["value", "top1_accuracy"], index=False),
        }

    def sweep_section(self):
        if "sweep" not in self.tables:
            return None
        df = self.tables["sweep"].sort_values("size")
        chart_df = df.set_index("size")[["value", "off_class_top3_mass"]].rename(
            columns={"value": "true class", "off_class_top3_mass": "top-3 other classes"}
        )
        return {
            "chart_html": self.build_chart(chart_df, "Size effect of training samples", "Training images", "Mean probability"),
            "table_html": get_table_html(df, pct_cols=["value", "top1_accuracy", "off_class_top3_mass"], index=False),
        }

    def relation_section(self):
        if "relation" not in self.tables:
            return None
        df = self.tables["relation"]
        return {"table_html": get_table_html(df, pct_cols=["mean_probability"], index=False)}

    def loss_sections(self):
        sections = []
        for name in LOSS_TABLES:
            if name not in self.tables:
                continue
            df = self.tables[name]
            index_col = df.columns[0]
            chart_df = df.set_index(index_col).select_dtypes("number")
            sections.append(
                {
                    "title": name.replace("_", " "),
                    "chart_html": self.build_chart(chart_df, name.replace("_", " "), index_col, "value"),
                }
            )
        return sections

    def build_chart(self, df, title, xlabel, ylabel):
        """runs dataframe.plot with styling, writes an svg copy and returns the interactive html"""
        # shared arguments used for svg and html chart generation
        chart_args = {
            "title": word_wrap_title(title),
            "xlabel": xlabel,
            "ylabel": ylabel,
        }

        chart = df.plot(height=400, backend="hvplot", **chart_args)

        df.plot(figsize=(10, 6), **chart_args).get_figure().savefig(self.svg_dir / f"{title.replace(' ', '_')}.svg")
        plt.close("all")

        return get_hvplot_html(chart)

    def image_grid(self, paths, name):
        """saves up to max_images images as one svg grid and returns its path relative to the report"""
        paths = sorted(paths)[: self.max_images]
        if not paths:
            return None
        columns = min(4, len(paths))
        rows = -(-len(paths) // columns)
        fig, axes = plt.subplots(rows, columns, figsize=(2 * columns, 2 * rows), squeeze=False)
        for ax in axes.flat:
            ax.axis("off")
        for ax, path in zip(axes.flat, paths):
            image = load_image(path)
            ax.imshow(to_display(image), cmap="gray" if image.shape[0] == 1 else None, vmin=0, vmax=1)
            ax.set_title(path.stem[:24], fontsize=6)
        out = self.svg_dir / f"{name}.svg"
        fig.savefig(out)
        plt.close(fig)
        return str(out.relative_to(self.output_dir))

    def image_sections(self):
        sections = []
        for input_dir in self.input_dirs:
            overlays = [path for path in (input_dir / "cam").glob("*_overlay.*") if path.suffix in IMAGE_SUFFIXES]
            samples = [path for path in (input_dir / "images").glob("*") if path.suffix in IMAGE_SUFFIXES]
            for label, paths in (("class activation maps", overlays), ("samples", samples)):
                grid = self.image_grid(paths, f"{input_dir.name}_{label.replace(' ', '_')}")
                if grid is not None:
                    sections.append({"title": f"{input_dir.name}: {label}", "svg_path": grid})
        return sections

    def build_html_report(self):
        """renders base.j2 into <output_dir>/report.html

        Returns:
            Path: the written report
        """
        data = {
            "title": self.title,
            "run_timestamp": self.run_timestamp,
            "inputs": [str(path) for path in self.input_dirs],
            "verification": self.verification_section(),
            "sweep": self.sweep_section(),
            "relation": self.relation_section(),
            "losses": self.loss_sections(),
            "images": self.image_sections(),
        }
        out = self.output_dir / "report.html"
        out.write_text(self.template.render(**data), encoding="utf-8")
        logger.info("wrote report to %s", out)
        return out
