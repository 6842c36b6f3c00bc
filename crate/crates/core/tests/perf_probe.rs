use mhdv_core::grid::WavenumberGrid;
use mhdv_core::ic::{self, IcDescriptor, IcKind};
use mhdv_core::operators::OperatorContext;
use mhdv_core::stepper::{SimState, Stepper};
use std::time::Instant;

#[test]
#[ignore]
fn step_timings() {
    for n in [16usize, 32, 64] {
        let grid = WavenumberGrid::new(n).unwrap();
        let mut desc = IcDescriptor::new(vec![IcKind::TaylorGreen, IcKind::SingleModeB]);
        desc.amp_b = 0.5;
        let (u, b) = ic::make_ic(&desc, &grid, 0).unwrap();
        let ctx = OperatorContext::new(&grid, 0.1).unwrap();
        let mut stepper = Stepper::new(ctx, 0.02, 0.0, true);
        let mut state = SimState::new(u, b);
        // warm up plans
        state = stepper.step(&state, 1e-4).unwrap().0;
        let reps = if n == 64 { 5 } else { 20 };
        let start = Instant::now();
        for _ in 0..reps {
            state = stepper.step(&state, 1e-4).unwrap().0;
        }
        let per = start.elapsed().as_secs_f64() / reps as f64;
        println!("n = {n}: {per:.4} s/step");
    }
}
