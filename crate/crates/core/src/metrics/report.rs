use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::par::Execution;

use super::{clear_mot, counting, default_alphas, hota, idf1};
use super::{ClearResult, CountResult, EvalSequence, HotaResult, IdentityResult};

pub const REPORT_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationConfig {
    pub alphas: Vec<f64>,
    pub clear_threshold: f64,
    pub identity_threshold: f64,
    pub hota: bool,
    pub clear: bool,
    pub identity: bool,
    pub count: bool,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            alphas: default_alphas(),
            clear_threshold: 0.5,
            identity_threshold: 0.5,
            hota: true,
            clear: true,
            identity: true,
            count: true,
        }
    }
}

impl EvaluationConfig {
    /// Enables exactly the metrics named in a comma list of
    /// `hota`, `clear`, `idf1` and `count`.
    pub fn with_metric_list(mut self, list: &str) -> Result<Self> {
        self.hota = false;
        self.clear = false;
        self.identity = false;
        self.count = false;
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "hota" => self.hota = true,
                "clear" => self.clear = true,
                "idf1" | "identity" => self.identity = true,
                "count" => self.count = true,
                other => return Err(Error::InvalidConfig(format!("unknown metric '{other}'"))),
            }
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for &a in &self.alphas {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::InvalidConfig(format!("alpha {a} outside (0, 1)")));
            }
        }
        for t in [self.clear_threshold, self.identity_threshold] {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidConfig(format!("IoU threshold {t} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Parses `start:step:stop` (inclusive) or a comma list of thresholds.
pub fn parse_alphas(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidConfig(format!("cannot parse alphas '{text}'"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let nums: Vec<f64> =
            parts.iter().map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        let (start, step, stop) = (nums[0], nums[1], nums[2]);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // rounded to 12 decimals so 0.05:0.05:0.5 yields 0.15, not 0.15000000000000002
        return Ok((0..=n).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect());
    }
    text.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub hota: Option<HotaResult>,
    pub clear: Option<ClearResult>,
    pub identity: Option<IdentityResult>,
    pub count: Option<CountResult>,
    /// Tracker throughput, when known.
    pub fps: Option<f64>,
}

pub fn evaluate(seq: &EvalSequence, cfg: &EvaluationConfig, exec: Execution) -> Result<MetricsReport> {
    cfg.validate()?;
    Ok(MetricsReport {
        hota: cfg.hota.then(|| hota(seq, &cfg.alphas, exec)),
        clear: cfg.clear.then(|| clear_mot(seq, cfg.clear_threshold)),
        identity: cfg.identity.then(|| idf1(seq, cfg.identity_threshold)),
        count: if cfg.count { Some(counting(seq)?) } else { None },
        fps: None,
    })
}

impl MetricsReport {
    pub fn to_json(&self) -> Value {
        let mut root = serde_json::Map::new();
        root.insert("format_version".into(), json!(REPORT_FORMAT_VERSION));
        if let Some(h) = &self.hota {
            let per_alpha: Vec<Value> = h
                .per_alpha
                .iter()
                .map(|a| {
                    json!({"alpha": a.alpha, "hota": a.hota, "det_a": a.det_a, "ass_a": a.ass_a,
                           "tp": a.tp, "fn": a.fn_, "fp": a.fp})
                })
                .collect();
            let mut v = json!({"hota": h.hota, "det_a": h.det_a, "ass_a": h.ass_a, "per_alpha": per_alpha});
            if let Some(w) = &h.warning {
                v["warning"] = json!(w);
            }
            root.insert("hota".into(), v);
        }
        if let Some(c) = &self.clear {
            root.insert(
                "clear".into(),
                json!({"mota": c.mota, "motp": c.motp, "tp": c.tp, "fp": c.fp, "fn": c.fn_,
                       "idsw": c.idsw, "num_gt": c.num_gt}),
            );
        }
        if let Some(i) = &self.identity {
            root.insert(
                "identity".into(),
                json!({"idf1": i.idf1, "idp": i.idp, "idr": i.idr, "idtp": i.idtp,
                       "idfp": i.idfp, "idfn": i.idfn}),
            );
        }
        if let Some(c) = &self.count {
            root.insert("count".into(), json!({"pct_dets": c.pct_dets, "pct_ids": c.pct_ids}));
        }
        if let Some(fps) = self.fps {
            root.insert("fps".into(), json!(fps));
        }
        Value::Object(root)
    }

    /// Aligned plain-text table: HOTA block, identity, CLEAR, count, speed.
    pub fn to_table(&self, label: &str) -> String {
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{:.3}", 100.0 * x));
        let int = |v: Option<usize>| v.map_or("-".to_string(), |x| x.to_string());
        let raw = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2}"));
        let header = [
            "Tracker", "HOTA", "AssA", "DetA", "IDF1", "IDSW", "MOTA", "FP", "FN", "%#Dets", "%#IDs", "FPS",
        ];
        let row = [
            label.to_string(),
            pct(self.hota.as_ref().map(|h| h.hota)),
            pct(self.hota.as_ref().map(|h| h.ass_a)),
            pct(self.hota.as_ref().map(|h| h.det_a)),
            pct(self.identity.as_ref().map(|i| i.idf1)),
            int(self.clear.as_ref().map(|c| c.idsw)),
            pct(self.clear.as_ref().map(|c| c.mota)),
            int(self.clear.as_ref().map(|c| c.fp)),
            int(self.clear.as_ref().map(|c| c.fn_)),
            raw(self.count.as_ref().map(|c| c.pct_dets)),
            raw(self.count.as_ref().map(|c| c.pct_ids)),
            self.fps.map_or("-".to_string(), |f| format!("{f:.0}")),
        ];
        let widths: Vec<usize> = header.iter().zip(&row).map(|(h, r)| h.len().max(r.len())).collect();
        let line = |cells: Vec<String>| {
            cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect::<Vec<_>>()
                .join("  ")
        };
        let head = line(header.iter().map(|s| s.to_string()).collect());
        let rule = "-".repeat(head.len());
        format!("{head}\n{rule}\n{}\n", line(row.to_vec()))
    }
}
