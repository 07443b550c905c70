//! One TOML file configuring every stage.
//!
//! ```toml
//! format_version = 1
//! [scenario]          # simulator; see `ScenarioConfig`
//! [room]              # optional; overrides `scenario.room`
//! [tracker]           # online association
//! [gallery]           # SVM gallery training
//! [evaluate]          # metrics = "hota,clear,idf1,count", alphas = "0.05:0.05:0.50"
//! [imprint]           # identity, t_min_s, t_max_s
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gallery::GalleryTrainingConfig;
use crate::imprints::{SvgStyle, TimeRange};
use crate::io::read_text;
use crate::metrics::{parse_alphas, EvaluationConfig};
use crate::model::AssociationConfig;
use crate::simulator::{RoomConfig, ScenarioConfig};

pub const CONFIG_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    /// Comma list of `hota`, `clear`, `idf1`, `count`.
    pub metrics: String,
    /// `start:step:stop` or a comma list.
    pub alphas: String,
    pub clear_threshold: f64,
    pub identity_threshold: f64,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        Self {
            metrics: "hota,clear,idf1,count".into(),
            alphas: "0.05:0.05:0.50".into(),
            clear_threshold: 0.5,
            identity_threshold: 0.5,
        }
    }
}

impl EvaluateSection {
    pub fn to_config(&self) -> Result<EvaluationConfig> {
        let cfg = EvaluationConfig {
            alphas: parse_alphas(&self.alphas)?,
            clear_threshold: self.clear_threshold,
            identity_threshold: self.identity_threshold,
            ..Default::default()
        }
        .with_metric_list(&self.metrics)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImprintSection {
    /// Render only this identity; all trajectories when unset.
    pub identity: Option<String>,
    pub t_min_s: f64,
    pub t_max_s: f64,
    /// Pixels per metre.
    pub scale: f64,
    pub max_points_per_line: usize,
}

impl Default for ImprintSection {
    fn default() -> Self {
        let style = SvgStyle::default();
        Self {
            identity: None,
            t_min_s: 0.0,
            t_max_s: 1000.0,
            scale: style.scale,
            max_points_per_line: style.max_points_per_line,
        }
    }
}

impl ImprintSection {
    pub fn range(&self) -> Result<TimeRange> {
        TimeRange::new(self.t_min_s, self.t_max_s)
    }

    pub fn style(&self) -> Result<SvgStyle> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidConfig("imprint.scale must be > 0".into()));
        }
        Ok(SvgStyle { scale: self.scale, max_points_per_line: self.max_points_per_line, ..SvgStyle::default() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub format_version: u64,
    pub scenario: ScenarioConfig,
    pub room: Option<RoomConfig>,
    pub tracker: AssociationConfig,
    pub gallery: GalleryTrainingConfig,
    pub evaluate: EvaluateSection,
    pub imprint: ImprintSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            format_version: CONFIG_FORMAT_VERSION,
            scenario: ScenarioConfig::default(),
            room: None,
            tracker: AssociationConfig::default(),
            gallery: GalleryTrainingConfig::default(),
            evaluate: EvaluateSection::default(),
            imprint: ImprintSection::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::parse("pipeline config", e))?;
        if cfg.format_version != CONFIG_FORMAT_VERSION {
            return Err(Error::Version {
                what: "pipeline config".into(),
                found: cfg.format_version,
                expected: CONFIG_FORMAT_VERSION,
            });
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&read_text(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Scenario with the top-level `[room]` applied.
    pub fn scenario(&self) -> ScenarioConfig {
        let mut s = self.scenario.clone();
        if let Some(room) = &self.room {
            s.room = room.clone();
        }
        s
    }

    pub fn room(&self) -> &RoomConfig {
        self.room.as_ref().unwrap_or(&self.scenario.room)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario().validate()?;
        self.tracker.validate()?;
        self.evaluate.to_config()?;
        self.imprint.range()?;
        self.imprint.style()?;
        Ok(())
    }
}

/// Reads a room from a bare room table, a file with a `[room]` table, or a
/// pipeline config (whose room may be the default one).
pub fn load_room(text: &str) -> Result<RoomConfig> {
    let value: toml::Table = toml::from_str(text).map_err(|e| Error::parse("room config", e))?;
    let room = if let Some(room) = value.get("room").filter(|_| !value.contains_key("format_version")) {
        room.clone().try_into().map_err(|e| Error::parse("room config", e))?
    } else if value.contains_key("format_version") || value.contains_key("scenario") {
        PipelineConfig::from_toml(text)?.room().clone()
    } else {
        toml::Value::Table(value).try_into().map_err(|e| Error::parse("room config", e))?
    };
    room.regions()?;
    Ok(room)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_defaults() {
        let cfg = PipelineConfig::default();
        assert_eq!(PipelineConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        let partial = PipelineConfig::from_toml("[tracker]\nshape_weight = 0.0\n").unwrap();
        assert_eq!(partial.tracker.shape_weight, 0.0);
        assert_eq!(partial.tracker.gate, 0.7);
    }

    #[test]
    fn version_and_unknown_keys() {
        assert_eq!(PipelineConfig::from_toml("format_version = 2").unwrap_err().code(), "E_VERSION");
        assert_eq!(PipelineConfig::from_toml("[tracker]\nlambda = 1").unwrap_err().code(), "E_PARSE");
        let mode = PipelineConfig::from_toml("[tracker]\nview_compare_mode = \"min_over_cyclic_shifts\"").unwrap();
        assert_eq!(mode.tracker.view_compare_mode, crate::model::ViewCompareMode::MinOverCyclicShifts);
    }

    #[test]
    fn room_loading() {
        let bare = "min = [0.0, 0.0]\nmax = [4.0, 4.0]\ndoor = [0.0, 2.0]\ndoor_width = 1.0\nrois = []\n";
        assert_eq!(load_room(bare).unwrap().max, [4.0, 4.0]);
        let nested = format!("[room]\n{bare}");
        assert_eq!(load_room(&nested).unwrap().max, [4.0, 4.0]);
        let full = PipelineConfig::default().to_toml();
        assert_eq!(load_room(&full).unwrap(), RoomConfig::default());
        assert_eq!(load_room("format_version = 1\n[scenario]\nnum_agents = 2\n").unwrap(), RoomConfig::default());
        let overridden = format!("format_version = 1\n[room]\n{bare}");
        assert_eq!(load_room(&overridden).unwrap().max, [4.0, 4.0]);
    }

    #[test]
    fn evaluate_section() {
        let e = EvaluateSection { metrics: "hota".into(), ..Default::default() }.to_config().unwrap();
        assert!(e.hota && !e.clear);
        assert_eq!(e.alphas.len(), 10);
    }
}
