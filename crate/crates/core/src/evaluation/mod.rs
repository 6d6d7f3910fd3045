//! Ranking metrics, cohort experiments and parameter sweeps.

pub mod ap;
pub mod cohort;
pub mod sweep;

pub use ap::average_precision;
pub use cohort::{
    p_snr_score, run_cohort, train_student, Arch, AttackSpec, CohortResult, CohortSpec, ProbeSpec, Score, ScoreRow,
    Scorer, StudentSpec, SynonymSpec, World,
};
pub use sweep::{run_sweep, sweep_csv, SweepParam, SweepPoint};
