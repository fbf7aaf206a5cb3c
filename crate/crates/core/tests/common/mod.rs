//! Independent reference implementations shared by the integration tests and
//! the acceptance runner. Deliberately written on bare arrays, without the
//! library's vector type.
#![allow(dead_code)]

use std::f64::consts::PI;

use murmur::flock::{
    alignment_term, bounds_aversion_term, circling_term, cohesion_term, compose_step,
    follow_term, limit_step, linearity_term, robot_rank, separation_term, AgentId, AgentState,
    BoundaryRegion, TermSet, WeightGains,
};
use murmur::engine::EngineConfig;
use murmur::rng::SplitMix64;
use murmur::vec2::Vec2;

pub type P = [f64; 2];

#[derive(Debug, Clone, Copy)]
pub struct OAgent {
    pub id: u32,
    pub robot: bool,
    pub x: P,
    pub v: P,
}

fn sub(a: P, b: P) -> P {
    [a[0] - b[0], a[1] - b[1]]
}

fn len(a: P) -> f64 {
    (a[0] * a[0] + a[1] * a[1]).sqrt()
}

pub fn unit(a: P) -> P {
    let n = len(a);
    if n < 1e-9 {
        [0.0, 0.0]
    } else {
        [a[0] / n, a[1] / n]
    }
}

fn clamp2(a: P) -> P {
    let n = len(a);
    if n < 2.0 {
        a
    } else {
        [2.0 * a[0] / n, 2.0 * a[1] / n]
    }
}

fn me(agents: &[OAgent], id: u32) -> OAgent {
    *agents.iter().find(|a| a.id == id).unwrap()
}

pub fn o_cohesion(agents: &[OAgent], id: u32) -> P {
    let mut m = [0.0, 0.0];
    for a in agents {
        m[0] += a.x[0];
        m[1] += a.x[1];
    }
    m[0] /= agents.len() as f64;
    m[1] /= agents.len() as f64;
    unit(sub(m, me(agents, id).x))
}

pub fn o_separation(agents: &[OAgent], id: u32, d_min: f64) -> P {
    let xi = me(agents, id).x;
    let mut ids: Vec<u32> = agents.iter().map(|a| a.id).filter(|&j| j != id).collect();
    ids.sort();
    let mut s = [0.0, 0.0];
    for j in ids {
        let d = sub(xi, me(agents, j).x);
        let n = len(d);
        if n > 0.0 && n < d_min {
            s[0] -= d[0] * (n - d_min);
            s[1] -= d[1] * (n - d_min);
            s = unit(s);
        }
    }
    s
}

pub fn o_alignment(agents: &[OAgent], id: u32) -> P {
    let others: Vec<&OAgent> = agents.iter().filter(|a| a.id != id).collect();
    if others.is_empty() {
        return [0.0, 0.0];
    }
    let mut m = [0.0, 0.0];
    for a in &others {
        m[0] += a.v[0] / others.len() as f64;
        m[1] += a.v[1] / others.len() as f64;
    }
    unit(m)
}

pub fn o_follow(xi: P, xh: P) -> P {
    unit(sub(xh, xi))
}

/// `b = [x_min, x_max, y_min, y_max, margin]`.
pub fn o_circling(k: usize, n: usize, t: f64, xi: P, b: [f64; 5], period: f64) -> P {
    let theta = 2.0 * PI * (t / period + k as f64 / n as f64);
    let w = b[1] - b[0];
    let l = b[3] - b[2];
    let r = 0.9 * w.min(l) / 2.0;
    let c = [(b[0] + b[1]) / 2.0, (b[2] + b[3]) / 2.0];
    clamp2(sub([c[0] + r * theta.cos(), c[1] + r * theta.sin()], xi))
}

pub fn o_linearity(agents: &[OAgent], id: u32, t: f64, b: [f64; 5], period: f64) -> P {
    let mine = me(agents, id);
    let robots: Vec<&OAgent> = agents.iter().filter(|a| a.robot).collect();
    let mut lane = 0;
    for r in &robots {
        if r.x[0] < mine.x[0] || (r.x[0] == mine.x[0] && r.id < mine.id) {
            lane += 1;
        }
    }
    let theta = 2.0 * PI * t / period;
    let w = b[1] - b[0];
    let l = b[3] - b[2];
    let target = [
        b[0] + 0.75 * theta.cos() + w * lane as f64 / robots.len() as f64 + 2.0,
        (b[2] + b[3]) / 2.0 + l / 2.0 * theta.sin(),
    ];
    clamp2(sub(target, mine.x))
}

pub fn o_bounds(xi: P, b: [f64; 5]) -> P {
    let cx = xi[0].max(b[0] + b[4]).min(b[1] - b[4]);
    let cy = xi[1].max(b[2] + b[4]).min(b[3] - b[4]);
    [cx - xi[0], cy - xi[1]]
}

pub fn o_compose(terms: &[P; 7], k: &[f64; 7]) -> P {
    let mut out = [0.0, 0.0];
    for (t, g) in terms.iter().zip(k) {
        out[0] += g * t[0];
        out[1] += g * t[1];
    }
    out
}

pub fn o_limit(d: P, v_max: f64, dt: f64) -> P {
    let cap = v_max * dt;
    let n = len(d);
    if n <= cap {
        d
    } else {
        [d[0] * cap / n, d[1] * cap / n]
    }
}

/// Random flock: up to six agents, at least one robot, with grid snapping
/// now and then to provoke ties and coincident agents.
pub struct Config {
    pub agents: Vec<OAgent>,
    pub boundary: [f64; 5],
    pub t: f64,
    pub gains: [f64; 7],
}

pub fn random_config(rng: &mut SplitMix64) -> Config {
    let x_min = rng.range_f64(-5.0, 5.0);
    let y_min = rng.range_f64(-5.0, 5.0);
    let w = rng.range_f64(2.0, 20.0);
    let l = rng.range_f64(2.0, 20.0);
    let boundary = [x_min, x_min + w, y_min, y_min + l, w.min(l) / 15.0];
    let n = 1 + rng.below(6) as usize;
    let snap = rng.next_f64() < 0.3;
    let mut ids: Vec<u32> = (0..20).collect();
    let mut agents = Vec::with_capacity(n);
    for k in 0..n {
        let id = ids.swap_remove(rng.below(ids.len() as u64) as usize);
        let mut x = [
            rng.range_f64(x_min - 1.0, x_min + w + 1.0),
            rng.range_f64(y_min - 1.0, y_min + l + 1.0),
        ];
        if snap {
            x = [(x[0] * 2.0).round() / 2.0, (x[1] * 2.0).round() / 2.0];
        }
        let v = if rng.next_f64() < 0.2 {
            [0.0, 0.0]
        } else {
            [rng.range_f64(-1.0, 1.0), rng.range_f64(-1.0, 1.0)]
        };
        agents.push(OAgent {
            id,
            robot: k == 0 || rng.next_f64() < 0.7,
            x,
            v,
        });
    }
    let mut gains = [0.0; 7];
    for g in &mut gains {
        *g = rng.range_f64(0.0, 2.0);
    }
    Config {
        agents,
        boundary,
        t: rng.range_f64(0.0, 200.0),
        gains,
    }
}

pub fn to_states(agents: &[OAgent]) -> Vec<AgentState> {
    agents
        .iter()
        .map(|a| {
            let p = Vec2::new(a.x[0], a.x[1]);
            let s = if a.robot {
                AgentState::robot(a.id, p)
            } else {
                AgentState::human(a.id, p)
            };
            s.with_velocity(Vec2::new(a.v[0], a.v[1]))
        })
        .collect()
}

fn err(a: Vec2, b: P) -> f64 {
    (a.x - b[0]).abs().max((a.y - b[1]).abs())
}

/// Per-operation maximum absolute error over `configs` random flocks.
pub fn term_oracle_errors(configs: usize, seed: u64) -> [(&'static str, f64); 9] {
    let mut rng = SplitMix64::new(seed);
    let names = [
        "cohesion", "separation", "alignment", "follow", "circling", "linearity", "bounds",
        "compose", "limit",
    ];
    let mut worst = [0.0f64; 9];
    let params = EngineConfig::default().term_params();
    for _ in 0..configs {
        let c = random_config(&mut rng);
        let b = c.boundary;
        let region = BoundaryRegion::with_margin(b[0], b[1], b[2], b[3], b[4]).unwrap();
        let states = to_states(&c.agents);
        let robots: Vec<&OAgent> = c.agents.iter().filter(|a| a.robot).collect();
        let human = c.agents.iter().filter(|a| !a.robot).min_by_key(|a| a.id);
        for r in &robots {
            let id = AgentId(r.id);
            let k = robots.iter().filter(|o| o.id < r.id).count();
            let (rank, n) = robot_rank(&states, id).unwrap();
            assert_eq!((rank, n), (k, robots.len()));
            let xi = Vec2::new(r.x[0], r.x[1]);
            let xh = human.map(|h| h.x);
            let expected = [
                o_cohesion(&c.agents, r.id),
                o_separation(&c.agents, r.id, params.d_min),
                o_alignment(&c.agents, r.id),
                xh.map_or([0.0, 0.0], |h| o_follow(r.x, h)),
                o_circling(k, robots.len(), c.t, r.x, b, params.circling_period_s),
                o_linearity(&c.agents, r.id, c.t, b, params.linearity_period_s),
                o_bounds(r.x, b),
            ];
            let got = [
                cohesion_term(&states, id).unwrap(),
                separation_term(&states, id, params.d_min).unwrap(),
                alignment_term(&states, id).unwrap(),
                xh.map_or(Vec2::ZERO, |h| follow_term(xi, Vec2::new(h[0], h[1]))),
                circling_term(k, robots.len(), c.t, xi, &region, params.circling_period_s),
                linearity_term(id, &states, c.t, &region, params.linearity_period_s).unwrap(),
                bounds_aversion_term(xi, &region),
            ];
            for (w, (g, e)) in worst.iter_mut().zip(got.iter().zip(&expected)) {
                *w = w.max(err(*g, *e));
            }
            let set = TermSet::compute(&states, id, c.t, &region, &params).unwrap();
            let set_terms = [
                set.cohesion, set.separation, set.alignment, set.follow, set.circling,
                set.linearity, set.bounds,
            ];
            for (w, (g, e)) in worst.iter_mut().zip(set_terms.iter().zip(&expected)) {
                *w = w.max(err(*g, *e));
            }
            let gains = WeightGains::from_array(c.gains);
            let composed = compose_step(&set, &gains);
            let o_composed = o_compose(&expected, &c.gains);
            worst[7] = worst[7].max(err(composed, o_composed));
            let limited = limit_step(composed, 1.0, 0.05);
            worst[8] = worst[8].max(err(limited, o_limit(o_composed, 1.0, 0.05)));
        }
    }
    let mut out = [("", 0.0); 9];
    for (o, (n, w)) in out.iter_mut().zip(names.iter().zip(worst)) {
        *o = (n, w);
    }
    out
}

/// Seven well-separated Gaussian-ish clusters in feature space, one per mode.
pub fn seven_clusters(per_class: usize, seed: u64) -> Vec<murmur::learn::TrainingExample> {
    use murmur::features::FeatureVector;
    use murmur::flock::ModeId;
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(per_class * 7);
    for (c, mode) in ModeId::ALL.into_iter().enumerate() {
        // Cluster c sits at +3 on axis c and -3 on axis (c + 1) % 8.
        let mut center = [0.0; 8];
        center[c] = 3.0;
        center[(c + 1) % 8] = -3.0;
        for k in 0..per_class {
            let mut v = center;
            for x in &mut v {
                // Sum of uniforms: bell-shaped, spread about 0.5.
                *x += (0..4).map(|_| rng.range_f64(-0.5, 0.5)).sum::<f64>();
            }
            out.push(murmur::learn::TrainingExample {
                features: FeatureVector::from_array(v),
                label: mode,
                tick: k as u64,
                session: "clusters".into(),
            });
        }
    }
    out
}

/// Largest relative error between the analytic gradient and central finite
/// differences, `|g - fd| / max(|g|, |fd|)`, over entries with
/// `max(|g|, |fd|) > 1e-7`; smaller entries are compared absolutely.
pub fn gradient_check(seed: u64) -> f64 {
    use murmur::learn::{loss_and_gradient, N_CLASSES, N_INPUTS};
    let mut rng = SplitMix64::new(seed);
    let inputs: Vec<[f64; N_INPUTS]> = (0..40)
        .map(|_| {
            let mut x = [1.0; N_INPUTS];
            for v in x.iter_mut().take(N_INPUTS - 1) {
                *v = rng.range_f64(-2.0, 2.0);
            }
            x
        })
        .collect();
    let labels: Vec<usize> = (0..40).map(|_| rng.below(N_CLASSES as u64) as usize).collect();
    let mut w = [[0.0; N_INPUTS]; N_CLASSES];
    for v in w.iter_mut().flatten() {
        *v = rng.range_f64(-1.0, 1.0);
    }
    let (_, grad) = loss_and_gradient(&w, &inputs, &labels);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for c in 0..N_CLASSES {
        for k in 0..N_INPUTS {
            let mut plus = w;
            plus[c][k] += h;
            let mut minus = w;
            minus[c][k] -= h;
            let fd = (loss_and_gradient(&plus, &inputs, &labels).0
                - loss_and_gradient(&minus, &inputs, &labels).0)
                / (2.0 * h);
            let g = grad[c][k];
            let scale = g.abs().max(fd.abs());
            let e = if scale > 1e-7 { (g - fd).abs() / scale } else { (g - fd).abs() };
            worst = worst.max(e);
        }
    }
    worst
}
