//! Browser bindings: set densities, parallelepiped search and certificate
//! verification. Every export returns a JSON string.

use std::collections::BTreeSet;

use serde::Serialize;
use sqtwist::certify::{verify_certificate, Certificate, Verdict};
use sqtwist::density::{f_value, smoothed_density, FiniteIntegerSet};
use sqtwist::parasearch::{brute_force_search, guided_search, BruteLimits, GuidedConfig, GuidedOutcome};
use wasm_bindgen::prelude::*;

/// Largest brute-force listing returned to the page.
pub const MAX_LISTED: usize = 50;

#[derive(Serialize)]
pub struct DensitySummary {
    pub size: usize,
    pub universe: u64,
    pub f: f64,
    pub smoothed: f64,
    pub truncation_error_bound: f64,
}

#[derive(Serialize)]
pub struct FindSummary {
    pub n: usize,
    pub brute_total: usize,
    pub brute_truncated: bool,
    pub brute: Vec<String>,
    pub guided: Option<String>,
    pub guided_exhausted: Option<String>,
}

#[derive(Serialize)]
pub struct VerifySummary {
    pub valid: bool,
    pub violations: Vec<String>,
}

/// Accepts the set file format or a plain whitespace/comma separated list.
pub fn parse_set(text: &str) -> Result<FiniteIntegerSet, String> {
    let normalized: String = text
        .lines()
        .flat_map(|line| {
            let line = line.trim();
            if line.starts_with('#') || line.starts_with("N=") {
                vec![line.to_string()]
            } else {
                line.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|w| !w.is_empty())
                    .map(str::to_string)
                    .collect()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    FiniteIntegerSet::parse(&normalized).map_err(|e| e.to_string())
}

pub fn density_summary(set: &str, t: f64, big_t: f64) -> Result<DensitySummary, String> {
    let s = parse_set(set)?;
    let report = smoothed_density(&s, big_t).map_err(|e| e.to_string())?;
    Ok(DensitySummary {
        size: s.len(),
        universe: s.universe(),
        f: f_value(&s, t).map_err(|e| e.to_string())?,
        smoothed: report.value,
        truncation_error_bound: report.truncation_error_bound,
    })
}

pub fn find_summary(set: &str, n: usize) -> Result<FindSummary, String> {
    if !(1..=4).contains(&n) {
        return Err("n must be between 1 and 4".into());
    }
    let s = parse_set(set)?;
    let limits = BruteLimits {
        max_results: 10_000,
        ..BruteLimits::default()
    };
    let brute = brute_force_search(&s, n, limits);
    let (guided, guided_exhausted) = match guided_search(&s, n, &BTreeSet::new(), &GuidedConfig::default()) {
        GuidedOutcome::Found(p, _) => (Some(p.to_record()), None),
        GuidedOutcome::Exhausted { level, reason, .. } => {
            let reason = serde_json::to_string(&reason).map_err(|e| e.to_string())?;
            (None, Some(format!("level {level}: {reason}")))
        }
    };
    Ok(FindSummary {
        n,
        brute_total: brute.found.len(),
        brute_truncated: brute.truncated,
        brute: brute.found.iter().take(MAX_LISTED).map(|p| p.to_record()).collect(),
        guided,
        guided_exhausted,
    })
}

pub fn verify_summary(json: &str) -> VerifySummary {
    match Certificate::from_json(json) {
        Ok(cert) => match verify_certificate(&cert) {
            Verdict::Valid => VerifySummary {
                valid: true,
                violations: Vec::new(),
            },
            Verdict::Invalid(v) => VerifySummary {
                valid: false,
                violations: v.iter().map(|x| x.to_string()).collect(),
            },
        },
        Err(e) => VerifySummary {
            valid: false,
            violations: vec![format!("unreadable certificate: {e}")],
        },
    }
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn density(set: &str, t: f64, big_t: f64) -> Result<String, JsError> {
    to_js(density_summary(set, t, big_t))
}

#[wasm_bindgen]
pub fn find(set: &str, n: usize) -> Result<String, JsError> {
    to_js(find_summary(set, n))
}

#[wasm_bindgen]
pub fn verify(certificate: &str) -> Result<String, JsError> {
    to_js(Ok(verify_summary(certificate)))
}
