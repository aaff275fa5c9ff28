use std::f64::consts::PI;

use sectorheat::conformal::ModelParams;
use sectorheat::corner::{partial_trace_integral, verify_td_subleading, FinitePartConfig};
use sectorheat::sector::{KernelSource, ModelAngle};

fn coarse(source: KernelSource) -> FinitePartConfig {
    FinitePartConfig {
        sigma_nodes: 8,
        radial_nodes: 4,
        angular_nodes: 4,
        inner_nodes: 6,
        source,
        ..FinitePartConfig::fast()
    }
}

#[test]
fn kernel_source_does_not_change_cutoff_integrals() {
    for alpha in [PI / 2.0, PI / 3.0] {
        let (img, ser) = (coarse(KernelSource::Images), coarse(KernelSource::Series));
        let angle = ModelAngle::unit(img.orientation(alpha));
        let a = partial_trace_integral(3.0, alpha, angle, &img).unwrap();
        let b = partial_trace_integral(3.0, alpha, angle, &ser).unwrap();
        assert!(((a - b) / a).abs() < 1e-5, "alpha={alpha}: {a} vs {b}");
    }
}

#[test]
fn td_symbol_vanishes_on_the_diagonal() {
    for (u, v) in [(0.1, 0.2), (-0.4, 0.05), (0.0, 0.0)] {
        let m = ModelParams::from_z0(u, v);
        assert_eq!(verify_td_subleading(m, [0.0, 0.0], [0.2, -0.1]).unwrap(), (0.0, 0.0));
    }
}
