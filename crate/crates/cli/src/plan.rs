use cfft_core::cfft::{build_plan, default_bases};
use cfft_core::{CfftPlan, CosetDecomposition, PlanKind};

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::forms::FormLibrary;

/// `m` with `n = 2^m - 1`, for the supported lengths 3 through 1023.
pub fn degree_for(n: usize) -> Result<u32> {
    (cfft_core::gf2m::MIN_DEGREE..=cfft_core::gf2m::MAX_DEGREE)
        .find(|&m| (1usize << m) - 1 == n)
        .ok_or_else(|| CliError::BadInput(format!("n = {n} is not 2^m - 1 for 2 <= m <= 10")))
}

/// Builds and oracle-checks a plan of length `n` with the default normal
/// bases.
pub fn build(n: usize, kind: PlanKind, forms: &FormLibrary, config: &Config) -> Result<CfftPlan> {
    let m = degree_for(n)?;
    let field = config.field(m)?;
    let dec = CosetDecomposition::new(m)?;
    let selected = forms.select(dec.sizes())?;
    let bases = default_bases(&field, &dec)?;
    Ok(build_plan(kind, &field, &dec, &bases, &selected)?)
}
