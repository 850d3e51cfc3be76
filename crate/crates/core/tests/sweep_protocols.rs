//! Order-parameter sweeps approach the mean-field curve as the oscillator
//! slows down at fixed spin, and as the spin grows at fixed frequency.

use dicke_ed::analytics::{mf_order_parameter, Branch};
use dicke_ed::sweep::{run_sweep, Grid, SweepConfig};

fn max_deviation(two_j: u32, omega_over_delta: f64) -> f64 {
    let cfg = SweepConfig {
        kappa: Grid::Range {
            start: 0.0,
            stop: 2.0,
            step: 0.1,
        },
        window: 0.1,
        two_j,
        omega_over_delta,
        fast: true,
        timing: false,
        ..Default::default()
    };
    let rows = run_sweep(&cfg).unwrap();
    assert!(rows.iter().all(|r| r.status.is_none()));
    rows.iter()
        .map(|r| (r.record.jx_over_j - mf_order_parameter(r.record.kappa, 1.0, Branch::Positive)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn slower_oscillator_approaches_mean_field() {
    let d: Vec<f64> = [1.0, 0.1, 0.01].iter().map(|&w| max_deviation(10, w)).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}

#[test]
fn larger_spin_approaches_mean_field() {
    let d: Vec<f64> = [10, 20, 40].iter().map(|&tj| max_deviation(tj, 1.0)).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}
