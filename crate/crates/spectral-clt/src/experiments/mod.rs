//! Experiment orchestration: configuration, seeded parallel replication,
//! and the artifact writers behind each CLI subcommand.
//!
//! Each experiment is a pure function of its resolved configuration. Work
//! is split into (n, replicate) cells with seeds derived from the master
//! seed and the cell coordinates, results are reduced in cell order, and
//! floats are printed in shortest round-trip form, so artifact bytes do
//! not depend on the worker count.

pub mod bounds_audit;
pub mod cluster_bench;
pub mod config;
pub mod ellipse;
pub mod er_clt;
pub mod io;
pub mod runner;
pub mod sample_files;
pub mod svg;
pub mod table_cov;

pub use bounds_audit::{run_bounds_audit, AuditSummary, BoundsRun};
pub use cluster_bench::{run_cluster_bench, BenchPoint, BenchRow, ClusterBenchRun};
pub use config::{Experiment, ExperimentConfig, ModelSpec, Overrides};
pub use ellipse::{run_ellipse_plot, EllipseRun, EllipseSummary};
pub use er_clt::{run_er_clt, ErPoint, ErRun};
pub use runner::{cells, run_cells, Cell};
pub use sample_files::{run_sample, SampleRun};
pub use table_cov::{run_table_cov, CovCell, TableCovRun};
