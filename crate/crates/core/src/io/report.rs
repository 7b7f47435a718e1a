use std::fmt::Write as _;

use serde::Serialize;

/// Result of one command-line run. Field order is the JSON key order.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub algorithm: String,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub episodes: u64,
    pub steps: u64,
    pub backups: u64,
    pub explored_states: u64,
    pub ec_collapses: u64,
    /// Only filled in on request, so that reports stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_millis: Option<u64>,
    pub converged: bool,
    /// False when the bounds come from overridden learning constants.
    pub sound: bool,
    pub seed: u64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn to_table(&self) -> String {
        let mut rows: Vec<(&str, String)> = vec![
            ("algorithm", self.algorithm.clone()),
            ("lower", format!("{:.9}", self.lower)),
            ("upper", format!("{:.9}", self.upper)),
            ("width", format!("{:.3e}", self.width)),
            ("episodes", self.episodes.to_string()),
            ("steps", self.steps.to_string()),
            ("backups", self.backups.to_string()),
            ("explored states", self.explored_states.to_string()),
            ("ec collapses", self.ec_collapses.to_string()),
        ];
        if let Some(ms) = self.wall_time_millis {
            rows.push(("wall time ms", ms.to_string()));
        }
        rows.push(("converged", self.converged.to_string()));
        rows.push((
            "sound",
            if self.sound {
                "yes".into()
            } else {
                "no (overridden constants)".into()
            },
        ));
        rows.push(("seed", self.seed.to_string()));
        let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<w$}  {v}");
        }
        out
    }
}
