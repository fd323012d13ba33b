//! Sweep configuration, execution, CSV output and figure presets.

pub mod output;
pub mod presets;
pub mod spec;
pub mod sweep;

pub use output::{emit_comparison_csv, emit_csv, read_records, rows_to_string, write_rows, CsvRecord, COLUMNS};
pub use presets::{figure_preset, NamedSweep, PRESET_NAMES};
pub use spec::{Channel, CouplingSpec, LengthUnit, Method, Point, Scenario, SweepRange, SweepSpec, SweepVariable};
pub use sweep::{
    compare_rows, evaluate, run_sweep, run_sweep_with_threads, run_with_comparison, ComparisonRow, SweepOutcome,
    SweepRow,
};
