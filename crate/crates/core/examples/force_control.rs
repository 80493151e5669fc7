//! PID force loop against a linear spring: deadzone and step response.

use prostate_sweep::control::{pid_step, PidConfig, PidState};
use prostate_sweep::geometry::Vec3;

fn main() {
    let cfg = PidConfig::default();
    let (k, dt) = (0.8, 0.01);

    // Inside the 0.1 N deadzone nothing moves.
    let (cmd, _) = pid_step(&PidState::default(), Vec3::new(0.0, 7.05, 0.0), &cfg, dt);
    println!("error 0.05 N -> command {:.3} mm/s", cmd.norm());

    // Start 2 mm short of the reference indentation.
    let mut depth = 7.0 / k - 2.0;
    let mut state = PidState::default();
    for i in 0..=120 {
        let force = Vec3::new(0.0, k * depth, 0.0);
        if i % 10 == 0 {
            println!("t {:4.2} s  F_y {:6.3} N", i as f64 * dt, force.y);
        }
        let (cmd, next) = pid_step(&state, force, &cfg, dt);
        depth += cmd.y * dt;
        state = next;
    }
}
