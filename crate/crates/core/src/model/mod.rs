//! Domain types shared by both solvers: instances, assignments, the
//! objective and the constraint checks.

mod assignment;
mod constraints;
mod instance;

pub use assignment::{utility, Assignment, Role};
pub use constraints::{
    check_constraints, feasibility_scan, li_score, Capacities, ConstraintId, ConstraintReport,
    FeasibilityReport, Mode,
};
pub use instance::{generate_instance, EdgeServerSpec, Instance, InstanceFile, UeId};
