//! Shared fixtures for the steady-state benchmarks.

use pairblock_core::{build_liouvillian, HilbertSpace, Liouvillian, SystemParams};

/// Weak- and strong-coupling reference points at the pair resonance.
pub fn reference_params() -> [(&'static str, SystemParams); 2] {
    let base = SystemParams::default();
    [
        ("weak", SystemParams { delta: 0.1, ..base }),
        (
            "strong",
            SystemParams {
                delta: 100.0,
                j_coupling: 100.0,
                ..base
            },
        ),
    ]
}

pub fn generator(params: &SystemParams, levels: usize) -> (Liouvillian, HilbertSpace) {
    let space = HilbertSpace::new(levels, levels).expect("levels >= 1");
    let l = build_liouvillian(params, &space).expect("valid parameters");
    (l, space)
}
