use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{find_agent, AgentId, AgentState, BoundaryRegion, FlockError, WeightGains};
use crate::vec2::{Vec2, ZERO_NORM};

/// Circling and linearity offsets longer than this are rescaled to this norm.
pub const TERM_CLAMP_NORM: f64 = 2.0;

/// The seven addends of the boid value for one robot.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TermSet {
    pub cohesion: Vec2,
    pub separation: Vec2,
    pub alignment: Vec2,
    pub follow: Vec2,
    pub circling: Vec2,
    pub linearity: Vec2,
    pub bounds: Vec2,
}

/// Parameters shared by the term computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermParams {
    pub d_min: f64,
    pub circling_period_s: f64,
    pub linearity_period_s: f64,
}

impl TermSet {
    /// All seven terms for robot `i` at time `t`, over every agent in `agents`.
    ///
    /// Following targets the lowest-id human; with no humans the follow term is zero.
    pub fn compute(
        agents: &[AgentState],
        i: AgentId,
        t: f64,
        boundary: &BoundaryRegion,
        params: &TermParams,
    ) -> Result<TermSet, FlockError> {
        let me = find_agent(agents, i)?;
        if !me.is_robot() {
            return Err(FlockError::NotARobot(i));
        }
        let (rank, n_robots) = robot_rank(agents, i)?;
        let follow = agents
            .iter()
            .filter(|a| !a.is_robot())
            .min_by_key(|a| a.id)
            .map_or(Vec2::ZERO, |h| follow_term(me.position, h.position));
        Ok(TermSet {
            cohesion: cohesion_term(agents, i)?,
            separation: separation_term(agents, i, params.d_min)?,
            alignment: alignment_term(agents, i)?,
            follow,
            circling: circling_term(
                rank,
                n_robots,
                t,
                me.position,
                boundary,
                params.circling_period_s,
            ),
            linearity: linearity_term(i, agents, t, boundary, params.linearity_period_s)?,
            bounds: bounds_aversion_term(me.position, boundary),
        })
    }

    pub fn is_finite(&self) -> bool {
        [
            self.cohesion,
            self.separation,
            self.alignment,
            self.follow,
            self.circling,
            self.linearity,
            self.bounds,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Unit vector from agent `i` toward the mean position of all agents, `i` included.
pub fn cohesion_term(agents: &[AgentState], i: AgentId) -> Result<Vec2, FlockError> {
    let me = find_agent(agents, i)?;
    let sum = agents.iter().fold(Vec2::ZERO, |acc, a| acc + a.position);
    let mean = sum / agents.len() as f64;
    Ok((mean - me.position).normalize_or_zero())
}

/// Repulsion from every neighbor closer than `d_min`.
///
/// The accumulator is renormalized after each contributing neighbor, so the
/// result depends on visiting order; neighbors are visited by ascending id.
/// Coincident neighbors contribute nothing.
pub fn separation_term(agents: &[AgentState], i: AgentId, d_min: f64) -> Result<Vec2, FlockError> {
    let me = find_agent(agents, i)?;
    let mut others: Vec<&AgentState> = agents.iter().filter(|a| a.id != i).collect();
    others.sort_by_key(|a| a.id);

    let mut s = Vec2::ZERO;
    for other in others {
        let delta = me.position - other.position;
        let dist = delta.norm();
        if dist < d_min && dist >= ZERO_NORM {
            s -= delta * (dist - d_min);
            s = s.normalize_or_zero();
        }
    }
    Ok(s)
}

/// Unit vector of the mean velocity of the other agents; zero when alone or
/// when that mean vanishes.
pub fn alignment_term(agents: &[AgentState], i: AgentId) -> Result<Vec2, FlockError> {
    find_agent(agents, i)?;
    let others = agents.len() - 1;
    if others == 0 {
        return Ok(Vec2::ZERO);
    }
    let sum = agents
        .iter()
        .filter(|a| a.id != i)
        .fold(Vec2::ZERO, |acc, a| acc + a.velocity);
    Ok((sum / others as f64).normalize_or_zero())
}

/// Unit vector from `x_i` toward `x_human`.
pub fn follow_term(x_i: Vec2, x_human: Vec2) -> Vec2 {
    (x_human - x_i).normalize_or_zero()
}

fn clamp_offset(offset: Vec2) -> Vec2 {
    if offset.norm() < TERM_CLAMP_NORM {
        offset
    } else {
        offset * (TERM_CLAMP_NORM / offset.norm())
    }
}

/// Offset toward this robot's slot on a circle of radius `0.9·min(l,w)/2`
/// about the region center, rotating with period `period_s`. Slots are
/// evenly phased by `i_index / n`.
pub fn circling_term(
    i_index: usize,
    n: usize,
    t: f64,
    x_i: Vec2,
    boundary: &BoundaryRegion,
    period_s: f64,
) -> Vec2 {
    let theta = TAU * (t / period_s + i_index as f64 / n as f64);
    let r = boundary.circling_radius();
    let target = boundary.center() + Vec2::new(r * theta.cos(), r * theta.sin());
    clamp_offset(target - x_i)
}

/// Rank of robot `i` in ascending-id order among robots, with the robot count.
pub fn robot_rank(agents: &[AgentState], i: AgentId) -> Result<(usize, usize), FlockError> {
    let me = find_agent(agents, i)?;
    if !me.is_robot() {
        return Err(FlockError::NotARobot(i));
    }
    let robots = agents.iter().filter(|a| a.is_robot());
    let rank = robots.clone().filter(|a| a.id < i).count();
    Ok((rank, robots.count()))
}

/// Lane index of robot `i`: its rank when robots are sorted by x (ties by id),
/// with the robot count.
pub fn robot_lane(agents: &[AgentState], i: AgentId) -> Result<(usize, usize), FlockError> {
    let me = find_agent(agents, i)?;
    if !me.is_robot() {
        return Err(FlockError::NotARobot(i));
    }
    let key = |a: &AgentState| (a.position.x, a.id);
    let mine = key(me);
    let robots = agents.iter().filter(|a| a.is_robot());
    let lane = robots
        .clone()
        .filter(|a| {
            let k = key(a);
            k.0 < mine.0 || (k.0 == mine.0 && k.1 < mine.1)
        })
        .count();
    Ok((lane, robots.count()))
}

/// Offset toward this robot's point on an elongated loop in its lane.
///
/// The lane's x offset is measured from `x_min`, one loop per lane across the
/// width, with the loop spanning the region's full length in y.
pub fn linearity_term(
    i: AgentId,
    agents: &[AgentState],
    t: f64,
    boundary: &BoundaryRegion,
    period_s: f64,
) -> Result<Vec2, FlockError> {
    let me = find_agent(agents, i)?;
    let (lane, n) = robot_lane(agents, i)?;
    let theta = TAU * t / period_s;
    let target = Vec2::new(
        boundary.x_min + 0.75 * theta.cos() + boundary.width() * lane as f64 / n as f64 + 2.0,
        boundary.center().y + boundary.length() / 2.0 * theta.sin(),
    );
    Ok(clamp_offset(target - me.position))
}

/// Displacement that brings `x_i` back inside the margin box; zero when already inside.
pub fn bounds_aversion_term(x_i: Vec2, boundary: &BoundaryRegion) -> Vec2 {
    let target = boundary.clamp_to_margin_box(x_i);
    let m = boundary.margin_m;
    Vec2::new(
        landing_offset(x_i.x, target.x, boundary.x_min + m, boundary.x_max - m),
        landing_offset(x_i.y, target.y, boundary.y_min + m, boundary.y_max - m),
    )
}

/// `target - from`, nudged by ulps so that `from + offset` rounds into `[lo, hi]`.
fn landing_offset(from: f64, target: f64, lo: f64, hi: f64) -> f64 {
    let mut d = target - from;
    while from + d < lo {
        d = d.next_up();
    }
    while from + d > hi {
        d = d.next_down();
    }
    d
}

/// Gain-weighted sum of the seven terms.
pub fn compose_step(terms: &TermSet, gains: &WeightGains) -> Vec2 {
    terms.cohesion * gains.cohesion
        + terms.separation * gains.separation
        + terms.alignment * gains.alignment
        + terms.follow * gains.follow
        + terms.circling * gains.circling
        + terms.linearity * gains.linearity
        + terms.bounds * gains.bounds
}

/// Cap a per-tick displacement at `v_max · dt`.
pub fn limit_step(delta: Vec2, v_max: f64, dt: f64) -> Vec2 {
    delta.clamp_norm(v_max * dt)
}
