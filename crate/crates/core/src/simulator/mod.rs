//! Deterministic synthetic scenarios: agents walking through a room,
//! leaving and re-entering through a door, observed by a noisy detector.
//!
//! All randomness comes from ChaCha8 streams keyed by `(seed, domain)` with
//! the stream number set to the agent or frame index, so each frame renders
//! independently and the output does not depend on thread count.

mod config;

pub use config::{
    AgentConfig, DetectionConfig, FeatureConfig, MotionConfig, RoiConfig, RoomConfig, ScenarioConfig,
};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::metrics::LabeledBox;
use crate::model::{BoundingBox3D, Detection, Frame, MultiViewDescriptor, NUM_VIEWS};
use crate::par::Execution;

pub const SCENARIO_FORMAT_VERSION: u64 = 1;
pub const CLUTTER_SOURCE: &str = "clutter";

const DOMAIN_PATH: u64 = 1;
const DOMAIN_SIGNATURE: u64 = 2;
const DOMAIN_RENDER: u64 = 3;
const DOMAIN_ENROLL: u64 = 4;

/// Interior inset for generated waypoints, metres.
const WALL_INSET: f64 = 0.5;

/// ChaCha8 keyed by `seed` and `domain` (little-endian in the first 16 key
/// bytes), positioned on `stream`.
pub fn stream_rng(seed: u64, domain: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentPath {
    pub identity: String,
    pub extents: [f64; 3],
    /// `(frame, [x, y])`, non-decreasing in frame.
    pub keyframes: Vec<(f64, [f64; 2])>,
    /// Inclusive frame ranges during which the agent is in the room.
    pub presence: Vec<(u64, u64)>,
}

impl AgentPath {
    pub fn is_present(&self, frame: u64) -> bool {
        self.presence.iter().any(|&(a, b)| a <= frame && frame <= b)
    }

    /// Piecewise-linear position, clamped to the first and last keyframe.
    pub fn position(&self, frame: u64) -> [f64; 2] {
        let t = frame as f64;
        let k = &self.keyframes;
        let next = k.partition_point(|&(kt, _)| kt <= t);
        if next == 0 {
            return k[0].1;
        }
        if next == k.len() {
            return k[k.len() - 1].1;
        }
        let (t0, p0) = k[next - 1];
        let (t1, p1) = k[next];
        let w = (t - t0) / (t1 - t0);
        [p0[0] + w * (p1[0] - p0[0]), p0[1] + w * (p1[1] - p0[1])]
    }

    pub fn true_box(&self, frame: u64) -> BoundingBox3D {
        let [x, y] = self.position(frame);
        BoundingBox3D::new([x, y, self.extents[2] / 2.0], self.extents).expect("validated extents")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub agents: Vec<AgentPath>,
    /// Unit-norm `8 x dim` signature per agent.
    pub signatures: Vec<MultiViewDescriptor>,
}

/// True box of a present agent at one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthRecord {
    pub frame: u64,
    pub identity: String,
    pub bbox: BoundingBox3D,
}

impl From<&GroundTruthRecord> for LabeledBox {
    fn from(r: &GroundTruthRecord) -> Self {
        LabeledBox::new(r.frame, r.identity.clone(), r.bbox)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub frames: Vec<Frame>,
    pub ground_truth: Vec<GroundTruthRecord>,
    /// Labeled descriptors for gallery training.
    pub enrollment: Vec<(MultiViewDescriptor, String)>,
}

pub fn generate_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    cfg.validate()?;
    let agents = if cfg.agents.is_empty() {
        (0..cfg.num_agents)
            .map(|i| generated_agent(cfg, seed, i))
            .collect::<Result<Vec<_>>>()?
    } else {
        cfg.agents.iter().enumerate().map(|(i, a)| explicit_agent(cfg, i, a)).collect()
    };
    let mut names: Vec<&str> = agents.iter().map(|a| a.identity.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidConfig("duplicate agent identity".into()));
    }
    let sig_seed = cfg.features.signature_seed.unwrap_or(seed);
    let signatures = (0..agents.len())
        .map(|i| signature(sig_seed, i, cfg.features.dim, cfg.features.view_offset_scale))
        .collect::<Result<Vec<_>>>()?;
    Ok(Scenario { config: cfg.clone(), seed, agents, signatures })
}

fn default_identity(i: usize) -> String {
    format!("staff_{:02}", i + 1)
}

fn explicit_agent(cfg: &ScenarioConfig, i: usize, a: &AgentConfig) -> AgentPath {
    let last = cfg.frame_count - 1;
    let mut absences: Vec<(u64, u64)> =
        a.absences.iter().filter(|w| w[0] <= last).map(|w| (w[0], w[1].min(last))).collect();
    absences.sort_unstable();
    AgentPath {
        identity: a.identity.clone().unwrap_or_else(|| default_identity(i)),
        extents: a.extents.unwrap_or(cfg.agent_extents),
        keyframes: a.waypoints.iter().map(|w| (w[0], [w[1], w[2]])).collect(),
        presence: complement(&absences, last),
    }
}

/// Inclusive ranges of `0..=last` not covered by the sorted `absences`.
fn complement(absences: &[(u64, u64)], last: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut next = 0u64;
    for &(a, b) in absences {
        if a > next {
            out.push((next, a - 1));
        }
        next = next.max(b + 1);
    }
    if next <= last {
        out.push((next, last));
    }
    out
}

fn uniform(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..r[1])
    }
}

fn interior_point(rng: &mut ChaCha8Rng, room: &RoomConfig) -> [f64; 2] {
    let mut axis = |k: usize| {
        let inset = WALL_INSET.min((room.max[k] - room.min[k]) / 4.0);
        uniform(rng, [room.min[k] + inset, room.max[k] - inset])
    };
    let x = axis(0);
    [x, axis(1)]
}

fn door_point(rng: &mut ChaCha8Rng, room: &RoomConfig) -> [f64; 2] {
    let mut p = room.door;
    // the door slides along whichever wall it sits on
    let along = if p[0] == room.min[0] || p[0] == room.max[0] { 1 } else { 0 };
    let half = room.door_width / 2.0;
    p[along] = (p[along] + uniform(rng, [-half, half])).clamp(room.min[along], room.max[along]);
    p
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn generated_agent(cfg: &ScenarioConfig, seed: u64, i: usize) -> Result<AgentPath> {
    let mut rng = stream_rng(seed, DOMAIN_PATH, i as u64);
    let m = &cfg.motion;
    let rate = cfg.frame_rate;
    let last = cfg.frame_count - 1;

    let lengths: Vec<u64> = (0..m.absences_per_agent)
        .map(|_| ((uniform(&mut rng, m.absence_secs) * rate).round() as u64).max(1))
        .collect();
    let gap = (m.min_presence_secs * rate).ceil() as u64;
    let needed = lengths.iter().sum::<u64>() + gap * (lengths.len() as u64 + 1);
    if needed > cfg.frame_count {
        return Err(Error::InvalidConfig(format!(
            "{} absences do not fit in {} frames",
            lengths.len(),
            cfg.frame_count
        )));
    }
    let free = cfg.frame_count - needed;
    let mut offsets: Vec<u64> = lengths.iter().map(|_| rng.random_range(0..=free)).collect();
    offsets.sort_unstable();
    let mut absences = Vec::with_capacity(lengths.len());
    let mut consumed = 0u64;
    for (j, (&len, &off)) in lengths.iter().zip(&offsets).enumerate() {
        let start = gap * (j as u64 + 1) + consumed + off;
        absences.push((start, start + len - 1));
        consumed += len;
    }
    let presence = complement(&absences, last);

    let mut keyframes = Vec::new();
    for &(s, e) in &presence {
        let must_exit = e < last;
        let exit = door_point(&mut rng, &cfg.room);
        let mut pos = if s == 0 { interior_point(&mut rng, &cfg.room) } else { door_point(&mut rng, &cfg.room) };
        let mut t = s as f64;
        keyframes.push((t, pos));
        loop {
            let target = interior_point(&mut rng, &cfg.room);
            let speed = uniform(&mut rng, m.speed);
            let dwell = uniform(&mut rng, m.dwell_secs) * rate;
            let arrive = t + dist(pos, target) / speed * rate;
            let leave = arrive + dwell;
            let reserve = if must_exit { dist(target, exit) / m.speed[0] * rate } else { 0.0 };
            if leave + reserve > e as f64 {
                break;
            }
            keyframes.push((arrive, target));
            if dwell > 0.0 {
                keyframes.push((leave, target));
            }
            t = leave;
            pos = target;
        }
        keyframes.push((e as f64, if must_exit { exit } else { pos }));
    }
    Ok(AgentPath { identity: default_identity(i), extents: cfg.agent_extents, keyframes, presence })
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample::<f64, _>(StandardNormal)
}

/// `normalize(g + scale * o_k)` per view with a shared latent `g`.
fn signature(seed: u64, agent: usize, dim: usize, scale: f64) -> Result<MultiViewDescriptor> {
    let mut rng = stream_rng(seed, DOMAIN_SIGNATURE, agent as u64);
    let latent: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng)).collect();
    let rows: Vec<Vec<f64>> = (0..NUM_VIEWS)
        .map(|_| latent.iter().map(|&g| g + scale * gaussian(&mut rng)).collect())
        .collect();
    MultiViewDescriptor::from_rows(&rows)
}

/// Signature plus per-component noise. The noise is always drawn so the
/// stream stays aligned whatever `sigma` is.
fn noisy(rng: &mut ChaCha8Rng, sig: &MultiViewDescriptor, sigma: f64) -> Result<MultiViewDescriptor> {
    let raw: Vec<f32> = sig.as_slice().iter().map(|&v| (v as f64 + sigma * gaussian(rng)) as f32).collect();
    MultiViewDescriptor::normalize(raw, sig.dim())
}

fn random_descriptor(rng: &mut ChaCha8Rng, dim: usize) -> Result<MultiViewDescriptor> {
    let raw: Vec<f32> = (0..NUM_VIEWS * dim).map(|_| gaussian(rng) as f32).collect();
    MultiViewDescriptor::normalize(raw, dim)
}

impl Scenario {
    pub fn frame_count(&self) -> u64 {
        self.config.frame_count
    }

    pub fn ground_truth(&self) -> Vec<GroundTruthRecord> {
        (0..self.frame_count()).flat_map(|f| self.ground_truth_at(f)).collect()
    }

    fn ground_truth_at(&self, frame: u64) -> Vec<GroundTruthRecord> {
        self.agents
            .iter()
            .filter(|a| a.is_present(frame))
            .map(|a| GroundTruthRecord { frame, identity: a.identity.clone(), bbox: a.true_box(frame) })
            .collect()
    }

    /// Detections of one frame, drawn from that frame's own stream.
    pub fn render_frame(&self, frame: u64) -> Result<Frame> {
        let cfg = &self.config;
        let det = &cfg.detection;
        let sigma = cfg.features.noise_sigma;
        let mut rng = stream_rng(self.seed, DOMAIN_RENDER, frame);
        let present: Vec<usize> = (0..self.agents.len()).filter(|&i| self.agents[i].is_present(frame)).collect();
        let positions: Vec<[f64; 2]> = present.iter().map(|&i| self.agents[i].position(frame)).collect();

        let mut detections = Vec::new();
        for (slot, &i) in present.iter().enumerate() {
            let agent = &self.agents[i];
            // fixed draw order per agent keeps the stream coupled across parameter changes
            let u_miss: f64 = rng.random();
            let u_occ: f64 = rng.random();
            let dc: [f64; 3] = std::array::from_fn(|_| gaussian(&mut rng));
            let de: [f64; 3] = std::array::from_fn(|_| gaussian(&mut rng));
            let descriptor = noisy(&mut rng, &self.signatures[i], sigma)?;

            let crowded = positions
                .iter()
                .enumerate()
                .any(|(o, &p)| o != slot && dist(p, positions[slot]) < det.occlusion_distance);
            if u_miss < det.p_miss || (crowded && u_occ < det.p_occlusion) {
                continue;
            }
            let truth = agent.true_box(frame);
            let c = truth.center();
            let center = std::array::from_fn(|k| c[k] + det.position_sigma * dc[k]);
            let extents =
                std::array::from_fn(|k| agent.extents[k] * (1.0 + det.extent_jitter * de[k]).max(0.1));
            detections.push(
                Detection::new(frame, BoundingBox3D::new(center, extents)?, descriptor).with_source(&agent.identity),
            );
        }

        if det.clutter_rate > 0.0 {
            let n = rng.sample(Poisson::new(det.clutter_rate).map_err(|e| Error::InvalidConfig(e.to_string()))?);
            for _ in 0..n as usize {
                let [x, y] = interior_point(&mut rng, &cfg.room);
                let e = [rng.random_range(0.2..1.0), rng.random_range(0.2..1.0), rng.random_range(0.3..2.0)];
                let bbox = BoundingBox3D::new([x, y, e[2] / 2.0], e)?;
                let descriptor = random_descriptor(&mut rng, cfg.features.dim)?;
                let conf = rng.random_range(0.2..0.8);
                detections.push(Detection::new(frame, bbox, descriptor).with_confidence(conf)?.with_source(CLUTTER_SOURCE));
            }
        }
        detections.shuffle(&mut rng);
        Ok(Frame { index: frame, detections })
    }

    /// `n_enroll` descriptors per identity at the detection noise level,
    /// drawn from a stream disjoint from the rendered frames.
    pub fn enrollment(&self) -> Result<Vec<(MultiViewDescriptor, String)>> {
        let f = &self.config.features;
        let mut out = Vec::with_capacity(self.agents.len() * f.n_enroll);
        for (i, agent) in self.agents.iter().enumerate() {
            let mut rng = stream_rng(self.seed, DOMAIN_ENROLL, i as u64);
            for _ in 0..f.n_enroll {
                out.push((noisy(&mut rng, &self.signatures[i], f.noise_sigma)?, agent.identity.clone()));
            }
        }
        Ok(out)
    }
}

pub fn render_frames(scenario: &Scenario, exec: Execution) -> Result<Rendered> {
    let frames = exec
        .map_range(0..scenario.frame_count() as usize, |f| scenario.render_frame(f as u64))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(Rendered { frames, ground_truth: scenario.ground_truth(), enrollment: scenario.enrollment()? })
}

/// Generates and renders in one call.
pub fn simulate(cfg: &ScenarioConfig, seed: u64, exec: Execution) -> Result<(Scenario, Rendered)> {
    let scenario = generate_scenario(cfg, seed)?;
    let rendered = render_frames(&scenario, exec)?;
    Ok((scenario, rendered))
}
