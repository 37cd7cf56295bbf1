"""Post-processing figures for the Cahn-Hilliard solver outputs."""

from .io import (BadCheckpoint, CSV_COLUMNS, MAGIC, SchemaError, Snapshot, SnapshotColumn,
                 SnapshotManifest, load_manifest, read_checkpoint, read_diagnostics_csv,
                 write_checkpoint)
from .plots import (build_norm_figure, build_snapshot_figure, plot_norm_evolution,
                    plot_snapshots)

__version__ = "0.1.0"
