//! Aggregate pipeline report: build the star, validate it, scan for
//! overlaps, run the contraction claims and the derivative-gap analysis,
//! and summarize pass/fail per section. Failures of a sub-step are recorded
//! in place and the report is still emitted.

use serde_json::json;

use crate::bigreal::Ctx;
use crate::derivseq::{derivative_sequence, gap_analysis};
use crate::star::{alpha_beta_x_sequences, build_star, sweep_contraction_claims, StarConfig};

#[derive(Clone, Debug)]
pub struct ReportConfig {
    pub digits: u32,
    pub layers: usize,
    pub phi: String,
    pub alpha0: String,
    /// Length of the derivative sequence to evaluate.
    pub deriv_n: usize,
    /// Upper index for the contraction-claim sweep.
    pub claim_upto: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            digits: 50,
            layers: 100,
            phi: "0".into(),
            alpha0: "88/21".into(),
            deriv_n: 100,
            claim_upto: 1000,
        }
    }
}

/// Run the full pipeline; every section records its own error instead of
/// aborting the report.
pub fn run_report(cfg: &ReportConfig) -> serde_json::Value {
    let mut all_ok = true;
    let d = cfg.digits;

    let star_cfg = StarConfig::new(cfg.digits, cfg.layers, &cfg.phi, &cfg.alpha0);
    let star_section = match &star_cfg {
        Err(e) => {
            all_ok = false;
            json!({"ok": false, "error": e.to_string()})
        }
        Ok(sc) => match build_star(sc) {
            Err(e) => {
                all_ok = false;
                json!({"ok": false, "error": e.to_string()})
            }
            Ok(st) => {
                let crosscheck = if sc.phi.is_zero() {
                    match st.crosscheck_analytic() {
                        Ok(c) => json!({
                            "max_alpha_deviation": c.max_alpha_deviation.to_dec_string_digits(6),
                            "max_x_deviation": c.max_x_deviation.to_dec_string_digits(6),
                        }),
                        Err(e) => json!({"error": e.to_string()}),
                    }
                } else {
                    serde_json::Value::Null
                };
                match st.to_net() {
                    Err(e) => {
                        all_ok = false;
                        json!({"ok": false, "error": format!("net assembly: {e}")})
                    }
                    Ok(net) => {
                        let validation = net.validate();
                        let overlaps = net.detect_overlaps();
                        if !validation.passes {
                            all_ok = false;
                        }
                        json!({
                            "ok": validation.passes,
                            "layers": st.layers.len() - 1,
                            "boundary_vertices": net.boundary_count(),
                            "interior_vertices": net.interior_count(),
                            "constructed_balanced_layer_vertices": st.constructed_balanced_count(),
                            "fermat_vertices": st.fermat_vertex_count(),
                            "validation": validation.to_json(12),
                            "overlaps": overlaps.to_json(&net),
                            "crosscheck": crosscheck,
                            "layer_table": st.layer_report(),
                        })
                    }
                }
            }
        },
    };

    let ctx = Ctx::new(cfg.digits);
    let alpha0 = ctx.parse_ratio(&cfg.alpha0);
    let claims_section = match &alpha0 {
        Err(e) => {
            all_ok = false;
            json!({"ok": false, "error": e.to_string()})
        }
        Ok(a0) => match alpha_beta_x_sequences(ctx, a0, cfg.claim_upto + 10)
            .and_then(|seq| sweep_contraction_claims(ctx, &seq).map(|c| (seq, c)))
        {
            Err(e) => {
                all_ok = false;
                json!({"ok": false, "error": e.to_string()})
            }
            Ok((seq, claims)) => {
                let all_hold = claims.iter().all(|c| c.holds);
                if !all_hold {
                    all_ok = false;
                }
                let x9 = seq[9].x.to_dec_string_digits(12);
                json!({
                    "ok": all_hold,
                    "boundaries_checked": claims.len(),
                    "x9": x9,
                    "alpha9": seq[9].alpha.to_dec_string_digits(12),
                    "loops": claims.iter().map(|c| json!({
                        "start": c.start,
                        "ell": c.ell,
                        "wide_case": c.wide_case,
                        "max_ratio": c.max_ratio.to_dec_string_digits(8),
                        "end_ratio": c.end_ratio.to_dec_string_digits(8),
                        "holds": c.holds,
                    })).collect::<Vec<_>>(),
                })
            }
        },
    };

    let deriv_section = match &alpha0 {
        Err(e) => json!({"ok": false, "error": e.to_string()}),
        Ok(a0) => match derivative_sequence(ctx, a0, cfg.deriv_n) {
            Err(e) => {
                all_ok = false;
                json!({"ok": false, "error": e.to_string()})
            }
            Ok(state) => match gap_analysis(&state.phi_primes()) {
                Err(e) => {
                    all_ok = false;
                    json!({"ok": false, "error": e.to_string()})
                }
                Ok(gaps) => json!({
                    "ok": true,
                    "n": cfg.deriv_n,
                    "min_gap": gaps.min_gap.to_dec_string_digits(12),
                    "argmin": [gaps.argmin.0, gaps.argmin.1],
                    "min_gap_even": gaps.min_gap_even.as_ref().map(|(g, ij)| json!({
                        "gap": g.to_dec_string_digits(12), "pair": [ij.0, ij.1]})),
                    "min_gap_odd": gaps.min_gap_odd.as_ref().map(|(g, ij)| json!({
                        "gap": g.to_dec_string_digits(12), "pair": [ij.0, ij.1]})),
                    "log_magnitude_slope": gaps.log_magnitude_slope,
                }),
            },
        },
    };

    json!({
        "config": {
            "digits": d,
            "layers": cfg.layers,
            "phi": cfg.phi,
            "alpha0": cfg.alpha0,
            "deriv_n": cfg.deriv_n,
            "claim_upto": cfg.claim_upto,
        },
        "star": star_section,
        "contraction_claims": claims_section,
        "derivative_sequence": deriv_section,
        "summary": {"all_checks_pass": all_ok},
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_layer_report_is_valid() {
        let cfg = ReportConfig {
            layers: 0,
            deriv_n: 5,
            claim_upto: 30,
            digits: 30,
            ..Default::default()
        };
        let rep = run_report(&cfg);
        assert_eq!(rep["star"]["layers"], 0);
        assert!(rep["summary"]["all_checks_pass"].as_bool().unwrap());
    }

    #[test]
    fn bad_alpha0_reports_config_rejection() {
        let cfg = ReportConfig {
            alpha0: "4.0".into(),
            layers: 1,
            deriv_n: 3,
            claim_upto: 30,
            digits: 30,
            ..Default::default()
        };
        let rep = run_report(&cfg);
        assert!(!rep["star"]["ok"].as_bool().unwrap());
        assert!(rep["star"]["error"].as_str().unwrap().contains("alpha0"));
    }

    #[test]
    fn default_like_report_small() {
        let cfg = ReportConfig {
            layers: 4,
            deriv_n: 10,
            claim_upto: 40,
            digits: 30,
            ..Default::default()
        };
        let rep = run_report(&cfg);
        assert!(rep["summary"]["all_checks_pass"].as_bool().unwrap(), "{rep}");
        assert!(rep["contraction_claims"]["x9"].as_str().is_some());
        assert!(rep["derivative_sequence"]["min_gap"].as_str().is_some());
        // the symmetric star is a strict multinet once suspensions repeat
        assert_eq!(rep["star"]["boundary_vertices"], 14);
    }
}
