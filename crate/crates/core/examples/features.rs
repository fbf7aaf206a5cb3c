// Feature vectors for a few formations.

use murmur::features::build_feature_vector;
use murmur::flock::{AgentState, BoundaryRegion};
use murmur::vec2::Vec2;

fn robots(points: &[(f64, f64)]) -> Vec<AgentState> {
    points
        .iter()
        .enumerate()
        .map(|(i, &p)| AgentState::robot(i as u32, p.into()))
        .collect()
}

pub fn main() {
    let b = BoundaryRegion::square(10.0).unwrap();
    let ring: Vec<(f64, f64)> = (0..6)
        .map(|i| {
            let a = std::f64::consts::TAU * f64::from(i) / 6.0;
            (5.0 + 3.0 * a.cos(), 5.0 + 3.0 * a.sin())
        })
        .collect();
    let formations: [(&str, Vec<(f64, f64)>); 4] = [
        ("huddle", vec![(4.8, 5.0), (5.2, 5.1), (5.0, 4.7), (5.1, 5.3)]),
        ("line", vec![(1.0, 2.0), (3.0, 4.0), (5.0, 6.0), (7.0, 8.0)]),
        ("ring", ring),
        ("corner", vec![(1.0, 1.0), (1.5, 1.2), (1.2, 1.6)]),
    ];
    for (name, pts) in formations {
        let mut agents = robots(&pts);
        agents.push(AgentState::human(99, Vec2::new(9.0, 9.0)));
        let f = build_feature_vector(&agents, &b).unwrap();
        println!(
            "{name:<7} rho=({:.2}, {:.2}) sigma={:.3}+-{:.3} alpha=[{:.3}, {:.3}, {:.3}, {:.4}]",
            f.rho[0], f.rho[1], f.sigma_mean, f.sigma_std, f.alpha[0], f.alpha[1], f.alpha[2], f.alpha[3]
        );
    }
}
