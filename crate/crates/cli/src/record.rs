use serde::{Deserialize, Serialize};
use spherekey::analysis::SweepRow;
use spherekey::montecarlo::StatComparison;

use crate::args::{AttackArg, MixArg, ProtocolArg};

/// Grid used by `sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

/// One JSON object per invocation. The configuration fields (`command`
/// through `total_count`) reproduce the invocation; see [`OutputRecord::args`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputRecord {
    pub command: String,
    pub protocol: Option<ProtocolArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attack: Option<AttackArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mix: Option<MixArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depolarize: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_rounds: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sift_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_count: Option<u64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_sift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qber: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_noguess: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i_ab: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i_ae: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i_be: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qber_star: Option<f64>,
    /// Standard error of the estimated `q` in `estimate-q`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_stderr: Option<f64>,
    /// Whether the observed sift rate is attainable by the attack model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_model: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sifted: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub errors: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_abs_z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flagged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistics: Option<Vec<StatComparison>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<SweepRow>>,
}

fn flag_value<T: Serialize>(v: &T) -> String {
    // value enums serialize as their kebab-case flag spelling
    serde_json::to_value(v).ok().and_then(|j| j.as_str().map(str::to_string)).unwrap_or_default()
}

impl OutputRecord {
    pub fn new(command: &str, protocol: ProtocolArg) -> Self {
        OutputRecord { command: command.into(), protocol: Some(protocol), ..Default::default() }
    }

    /// Command-line arguments that regenerate this record.
    pub fn args(&self) -> Vec<String> {
        let mut out = vec![self.command.clone()];
        // estimate-q reports q and the assumed attack as results, not inputs
        let estimate = self.command == "estimate-q";
        let mut push = |flag: &str, value: String| {
            out.push(format!("--{flag}"));
            out.push(value);
        };
        if let Some(p) = &self.protocol {
            push("protocol", flag_value(p));
        }
        if let Some(a) = self.attack.as_ref().filter(|_| !estimate) {
            push("attack", flag_value(a));
        }
        if let Some(m) = &self.mix {
            push("mix", flag_value(m));
        }
        if let Some(q) = self.q.filter(|_| !estimate) {
            push("q", q.to_string());
        }
        if let Some(p) = self.depolarize {
            push("depolarize", p.to_string());
        }
        if let Some(n) = self.n_rounds {
            push("n", n.to_string());
        }
        if let Some(s) = self.seed {
            push("seed", s.to_string());
        }
        if let Some(g) = self.grid {
            push("from", g.from.to_string());
            push("to", g.to.to_string());
            push("step", g.step.to_string());
        }
        if let Some(s) = self.sift_count {
            push("sift", s.to_string());
        }
        if let Some(t) = self.total_count {
            push("total", t.to_string());
        }
        out
    }

    fn scalars(&self) -> Vec<(&'static str, Option<f64>)> {
        vec![
            ("q", self.q),
            ("depolarize", self.depolarize),
            ("p_sift", self.p_sift),
            ("qber", self.qber),
            ("p_noguess", self.p_noguess),
            ("i_ab", self.i_ab),
            ("i_ae", self.i_ae),
            ("i_be", self.i_be),
            ("r", self.r),
            ("q_star", self.q_star),
            ("qber_star", self.qber_star),
            ("q_stderr", self.q_stderr),
            ("max_abs_z", self.max_abs_z),
        ]
    }

    /// Every numeric field must be finite before the record is emitted.
    pub fn check_finite(&self) -> Result<(), String> {
        let mut values: Vec<(String, f64)> = self
            .scalars()
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
            .collect();
        for row in self.rows.iter().flatten() {
            for (k, v) in [("q", row.q), ("p_sift", row.p_sift), ("qber", row.qber), ("i_ab", row.i_ab), ("i_ae", row.i_ae), ("i_be", row.i_be), ("r", row.r)] {
                values.push((format!("rows.{k}"), v));
            }
        }
        for s in self.statistics.iter().flatten() {
            values.push((format!("{}.observed", s.name), s.observed));
            values.push((format!("{}.expected", s.name), s.expected));
            values.push((format!("{}.z", s.name), s.z));
        }
        match values.into_iter().find(|(_, v)| !v.is_finite()) {
            Some((k, v)) => Err(format!("non-finite value {v} in field {k}")),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    /// Header row plus one row per grid point (sweep), per statistic
    /// (simulate) or a single row otherwise.
    pub fn to_csv(&self) -> Result<String, String> {
        let mut w = csv::Writer::from_writer(vec![]);
        let protocol = self.protocol.as_ref().map(flag_value).unwrap_or_default();
        let attack = self.attack.as_ref().map(flag_value).unwrap_or_default();
        let mix = self.mix.as_ref().map(flag_value).unwrap_or_default();
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        let err = |e: csv::Error| e.to_string();

        if let Some(rows) = &self.rows {
            w.write_record(["protocol", "attack", "mix", "depolarize", "q", "p_sift", "qber", "i_ab", "i_ae", "i_be", "r"])
                .map_err(err)?;
            for row in rows {
                w.write_record([
                    protocol.clone(),
                    attack.clone(),
                    mix.clone(),
                    opt(self.depolarize),
                    row.q.to_string(),
                    row.p_sift.to_string(),
                    row.qber.to_string(),
                    row.i_ab.to_string(),
                    row.i_ae.to_string(),
                    row.i_be.to_string(),
                    row.r.to_string(),
                ])
                .map_err(err)?;
            }
        } else if let Some(stats) = &self.statistics {
            w.write_record([
                "protocol", "attack", "mix", "q", "depolarize", "seed", "n_rounds", "statistic", "observed", "expected",
                "trials", "z",
            ])
            .map_err(err)?;
            for s in stats {
                w.write_record([
                    protocol.clone(),
                    attack.clone(),
                    mix.clone(),
                    opt(self.q),
                    opt(self.depolarize),
                    self.seed.map(|s| s.to_string()).unwrap_or_default(),
                    self.n_rounds.map(|n| n.to_string()).unwrap_or_default(),
                    s.name.clone(),
                    s.observed.to_string(),
                    s.expected.to_string(),
                    s.trials.to_string(),
                    s.z.to_string(),
                ])
                .map_err(err)?;
            }
        } else {
            let present: Vec<_> = self.scalars().into_iter().filter(|(_, v)| v.is_some()).collect();
            let mut header = vec!["command", "protocol", "attack", "mix"];
            header.extend(present.iter().map(|(k, _)| *k));
            let mut row = vec![self.command.clone(), protocol, attack, mix];
            row.extend(present.iter().map(|(k, v)| {
                let v = v.unwrap();
                if matches!(*k, "q_star" | "qber_star") {
                    format!("{v:.4}")
                } else {
                    v.to_string()
                }
            }));
            if let (Some(s), Some(t)) = (self.sift_count, self.total_count) {
                header.extend(["sift_count", "total_count"]);
                row.extend([s.to_string(), t.to_string()]);
            }
            w.write_record(&header).map_err(err)?;
            w.write_record(&row).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| e.to_string())?;
        String::from_utf8(bytes).map_err(|e| e.to_string())
    }
}
