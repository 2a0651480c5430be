//! Random-matrix realization of the free Poisson process, its range
//! projections, and the triangular free extremal process.

mod lab;
mod mp;
mod partition;
mod triangular;

pub use lab::{
    extremal_process_report, factor_range, join_additivity, range_projection,
    sample_free_poisson_matrix, FactorRange, FreePoissonSample, JoinCheck, ProcessReport,
    SubsetRecord, JOIN_ANGLE_TOLERANCE, RANGE_TOLERANCE,
};
pub use mp::{mp_bulk_cdf, mp_cdf, triangular_law_cdf, MpBulk, MpLaw};
pub use partition::{Allotment, Atom, Partition, SubsetId};
pub use triangular::{quantile_diagonal, realize_triangular_process, triangular_subset_max};
