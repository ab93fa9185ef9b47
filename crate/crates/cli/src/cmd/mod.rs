pub mod analyze;
pub mod meanopt;
pub mod plan;
pub mod simulate;
pub mod sweep;
pub mod tradeoff;
pub mod validate;

use dvfs_core::{Catalog, ReferenceClock};

use crate::output::Format;

/// Settings shared by every command.
pub struct Context {
    pub catalog: Catalog,
    pub format: Format,
    pub seed: Option<u64>,
    pub reference: ReferenceClock,
}
