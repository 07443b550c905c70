use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imprints::{RegionKind, RegionOfInterest, STERILE_BORDER_M};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoiConfig {
    pub name: String,
    pub kind: RegionKind,
    /// X-Y vertices in metres.
    pub polygon: Vec<[f64; 2]>,
    pub margin: f64,
}

impl Default for RoiConfig {
    fn default() -> Self {
        Self { name: String::new(), kind: RegionKind::Other, polygon: Vec::new(), margin: STERILE_BORDER_M }
    }
}

impl RoiConfig {
    pub fn to_region(&self) -> Result<RegionOfInterest> {
        RegionOfInterest::new(self.name.clone(), self.polygon.clone(), self.margin, self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoomConfig {
    pub min: [f64; 2],
    pub max: [f64; 2],
    /// Centre of the doorway agents leave and re-enter through.
    pub door: [f64; 2],
    pub door_width: f64,
    pub rois: Vec<RoiConfig>,
}

impl Default for RoomConfig {
    fn default() -> Self {
        let rect = |x0: f64, y0: f64, x1: f64, y1: f64| vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
        Self {
            min: [0.0, 0.0],
            max: [8.0, 6.0],
            door: [0.0, 3.0],
            door_width: 1.2,
            rois: vec![
                RoiConfig {
                    name: "patient_table".into(),
                    kind: RegionKind::Sterile,
                    polygon: rect(3.2, 2.6, 5.2, 3.4),
                    margin: STERILE_BORDER_M,
                },
                RoiConfig {
                    name: "instrument_table".into(),
                    kind: RegionKind::Sterile,
                    polygon: rect(3.4, 4.2, 4.6, 4.8),
                    margin: STERILE_BORDER_M,
                },
                RoiConfig {
                    name: "station".into(),
                    kind: RegionKind::Station,
                    polygon: rect(6.6, 0.4, 7.6, 1.2),
                    margin: 0.0,
                },
            ],
        }
    }
}

impl RoomConfig {
    pub fn regions(&self) -> Result<Vec<RegionOfInterest>> {
        self.rois.iter().map(RoiConfig::to_region).collect()
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (0..2).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionConfig {
    /// Walking speed range, m/s.
    pub speed: [f64; 2],
    /// Pause at each waypoint, seconds.
    pub dwell_secs: [f64; 2],
    pub absences_per_agent: usize,
    /// Length range of each absence, seconds.
    pub absence_secs: [f64; 2],
    /// Minimum presence before, between and after absences, seconds.
    pub min_presence_secs: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            speed: [0.3, 1.0],
            dwell_secs: [0.0, 4.0],
            absences_per_agent: 2,
            absence_secs: [10.0, 30.0],
            min_presence_secs: 2.0,
        }
    }
}

/// Explicit agent schedule; replaces the generated one when given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub identity: Option<String>,
    /// `[frame, x, y]` keyframes, linearly interpolated.
    pub waypoints: Vec<[f64; 3]>,
    /// Inclusive `[first, last]` frames of absence.
    pub absences: Vec<[u64; 2]>,
    pub extents: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub dim: usize,
    /// Seed of the per-identity latent signatures; defaults to the master seed.
    pub signature_seed: Option<u64>,
    /// Scale of the per-view offset added to an identity's latent.
    pub view_offset_scale: f64,
    /// Per-component Gaussian noise added before normalization.
    pub noise_sigma: f64,
    /// Enrollment descriptors per identity.
    pub n_enroll: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { dim: 128, signature_seed: None, view_offset_scale: 0.5, noise_sigma: 0.05, n_enroll: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionConfig {
    /// Per-axis Gaussian noise on the box center, metres.
    pub position_sigma: f64,
    /// Relative Gaussian jitter on the box extents.
    pub extent_jitter: f64,
    pub p_miss: f64,
    /// X-Y distance below which two agents may occlude each other.
    pub occlusion_distance: f64,
    /// Miss probability for an agent within `occlusion_distance` of another.
    pub p_occlusion: f64,
    /// Mean false positives per frame.
    pub clutter_rate: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            position_sigma: 0.03,
            extent_jitter: 0.03,
            p_miss: 0.1,
            occlusion_distance: 0.5,
            p_occlusion: 0.5,
            clutter_rate: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub frame_count: u64,
    pub frame_rate: f64,
    pub num_agents: usize,
    /// Default agent box, metres.
    pub agent_extents: [f64; 3],
    pub room: RoomConfig,
    pub motion: MotionConfig,
    pub features: FeatureConfig,
    pub detection: DetectionConfig,
    pub agents: Vec<AgentConfig>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            frame_count: 3000,
            frame_rate: 30.0,
            num_agents: 5,
            agent_extents: [0.6, 0.6, 1.8],
            room: RoomConfig::default(),
            motion: MotionConfig::default(),
            features: FeatureConfig::default(),
            detection: DetectionConfig::default(),
            agents: Vec::new(),
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidConfig(msg()))
    }
}

fn is_prob(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

fn is_range(r: [f64; 2]) -> bool {
    r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]
}

impl ScenarioConfig {
    /// Zero-noise, no-absence variant of this configuration.
    pub fn noiseless(mut self) -> Self {
        self.features.noise_sigma = 0.0;
        self.detection.position_sigma = 0.0;
        self.detection.extent_jitter = 0.0;
        self.detection.p_miss = 0.0;
        self.detection.p_occlusion = 0.0;
        self.detection.clutter_rate = 0.0;
        self.motion.absences_per_agent = 0;
        for a in &mut self.agents {
            a.absences.clear();
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        check(self.frame_count >= 1, || "frame_count must be >= 1".into())?;
        check(self.frame_rate > 0.0 && self.frame_rate.is_finite(), || "frame_rate must be > 0".into())?;
        check(self.num_agents >= 1 || !self.agents.is_empty(), || "need at least one agent".into())?;
        check(self.agent_extents.iter().all(|&e| e > 0.0 && e.is_finite()), || {
            "agent_extents must be positive".into()
        })?;
        let room = &self.room;
        check((0..2).all(|k| room.min[k] < room.max[k]), || "room min must be below max".into())?;
        check(room.contains(room.door), || "door must lie within the room bounds".into())?;
        check(room.door_width >= 0.0, || "door_width must be >= 0".into())?;
        let m = &self.motion;
        check(is_range(m.speed) && m.speed[0] > 0.0, || "motion.speed must be a positive range".into())?;
        check(is_range(m.dwell_secs) && m.dwell_secs[0] >= 0.0, || "motion.dwell_secs invalid".into())?;
        check(is_range(m.absence_secs) && m.absence_secs[0] > 0.0, || "motion.absence_secs invalid".into())?;
        check(m.min_presence_secs >= 0.0, || "motion.min_presence_secs must be >= 0".into())?;
        let f = &self.features;
        check(f.dim >= 1, || "features.dim must be >= 1".into())?;
        check(f.noise_sigma >= 0.0 && f.view_offset_scale >= 0.0, || "feature scales must be >= 0".into())?;
        let d = &self.detection;
        check(d.position_sigma >= 0.0 && d.extent_jitter >= 0.0, || "detection sigmas must be >= 0".into())?;
        check(is_prob(d.p_miss) && is_prob(d.p_occlusion), || "probabilities must lie in [0, 1]".into())?;
        check(d.clutter_rate >= 0.0 && d.clutter_rate.is_finite(), || "clutter_rate must be >= 0".into())?;
        check(d.occlusion_distance >= 0.0, || "occlusion_distance must be >= 0".into())?;
        for (i, a) in self.agents.iter().enumerate() {
            check(!a.waypoints.is_empty(), || format!("agent {i} has no waypoints"))?;
            for w in &a.waypoints {
                if !room.contains([w[1], w[2]]) {
                    return Err(Error::InvalidConfig(format!(
                        "agent {i}: waypoint ({}, {}) outside room bounds",
                        w[1], w[2]
                    )));
                }
            }
            check(a.waypoints.windows(2).all(|w| w[0][0] < w[1][0]), || {
                format!("agent {i}: waypoint frames must increase")
            })?;
            check(a.absences.iter().all(|w| w[0] <= w[1]), || format!("agent {i}: empty absence window"))?;
        }
        room.regions()?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::parse("scenario config", e))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
