//! The four subcommands.

use rayon::prelude::*;
use serde::Serialize;

use dirac_scatter::cone::cone_report;
use dirac_scatter::hc_bands::solve_bands_hc;
use dirac_scatter::spectrum::{
    gap_closing_alpha, linspace, spectrum_scan as scan, BandMesh, LatticeKind,
};
use dirac_scatter::tri_bands::solve_bands_tri;
use dirac_scatter::{bz_mesh, bz_path, Greens, LatticeConfig, Momentum, Vec2};

use crate::config::{OutputFormat, RunConfig};
use crate::output::{num, write_csv, write_json, Ext, SCHEMA};
use crate::CliError;

fn setup(cfg: &RunConfig) -> Result<(LatticeConfig<f64>, Greens<f64>), CliError> {
    let lat = LatticeConfig::new(cfg.a)?;
    let greens = Greens::new(&lat)?;
    Ok((lat, greens))
}

fn lattice_name(k: LatticeKind) -> &'static str {
    match k {
        LatticeKind::Triangular => "triangular",
        LatticeKind::Honeycomb => "honeycomb",
    }
}

fn meta(command: &str, cfg: &RunConfig, alpha: f64) -> String {
    format!(
        "command={} lattice={} a={} alpha={} tolerance={} jmax={} mesh_n={}",
        command,
        lattice_name(cfg.lattice),
        num(cfg.a),
        num(alpha),
        num(cfg.tolerance),
        cfg.jmax,
        cfg.mesh_n
    )
}

fn parse_pair(s: &str) -> Result<(f64, f64), CliError> {
    let err = || CliError::Config(format!("expected 'x,y', got '{}'", s));
    let (a, b) = s.split_once(',').ok_or_else(err)?;
    let x: f64 = a.trim().parse().map_err(|_| err())?;
    let y: f64 = b.trim().parse().map_err(|_| err())?;
    if !(x.is_finite() && y.is_finite()) {
        return Err(err());
    }
    Ok((x, y))
}

fn waypoint(lat: &LatticeConfig<f64>, name: &str) -> Result<Vec2<f64>, CliError> {
    match name.trim() {
        "G" | "Gamma" | "\u{393}" => Ok(lat.gamma()),
        "K" => Ok(lat.dirac),
        "K'" => Ok(-lat.dirac),
        "M" => Ok(lat.m_point()),
        other => Err(CliError::Config(format!(
            "unknown waypoint '{}' (use G, K, K', M)",
            other
        ))),
    }
}

#[derive(Serialize)]
struct BandRow {
    k_index: usize,
    kx: f64,
    ky: f64,
    j: usize,
    value: Ext,
    multiplicity: usize,
    provenance: String,
}

#[derive(Serialize)]
struct Doc<'a, R: Serialize> {
    schema: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: R,
}

fn rows_at(
    greens: &Greens<f64>,
    kind: LatticeKind,
    idx: usize,
    k: &Momentum<f64>,
    alpha: f64,
    jmax: usize,
) -> Result<Vec<BandRow>, CliError> {
    let entries: Vec<(f64, usize, String)> = match kind {
        LatticeKind::Triangular => {
            let b = solve_bands_tri(greens, k, alpha, jmax)?;
            (1..=jmax)
                .map(|j| {
                    b.band(j)
                        .map(|e| (e.value, e.multiplicity, format!("{:?}", e.provenance)))
                })
                .collect::<Option<_>>()
        }
        LatticeKind::Honeycomb => {
            let b = solve_bands_hc(greens, k, alpha, jmax)?;
            (1..=jmax)
                .map(|j| {
                    b.band(j)
                        .map(|e| (e.value, e.multiplicity, format!("{:?}", e.provenance)))
                })
                .collect::<Option<_>>()
        }
    }
    .expect("solver returns jmax values");
    let kv = k.k();
    Ok(entries
        .into_iter()
        .enumerate()
        .map(|(j, (value, multiplicity, provenance))| BandRow {
            k_index: idx,
            kx: kv.x,
            ky: kv.y,
            j: j + 1,
            value: Ext(value),
            multiplicity,
            provenance,
        })
        .collect())
}

/// Band values, one row per `(k, j)`, sorted by point index then band.
pub fn bands(
    cfg: &RunConfig,
    path: Option<&str>,
    steps: usize,
    ks: &[String],
    case3: Option<f64>,
) -> Result<(), CliError> {
    let (lat, greens) = setup(cfg)?;
    let points: Vec<Momentum<f64>> = if !ks.is_empty() {
        ks.iter()
            .map(|s| parse_pair(s).map(|(x, y)| lat.momentum(Vec2::new(x, y))))
            .collect::<Result<_, _>>()?
    } else if let Some(p) = path {
        if steps == 0 {
            return Err(CliError::Config("steps must be at least 1".into()));
        }
        let wps = p
            .split('-')
            .map(|w| waypoint(&lat, w))
            .collect::<Result<Vec<_>, _>>()?;
        bz_path(&lat, &wps, steps)
    } else {
        bz_mesh(&lat, cfg.mesh_n)
    };
    let mut alpha = cfg.alpha.0;
    if let Some(level) = case3 {
        if cfg.lattice != LatticeKind::Honeycomb || points.len() != 1 {
            return Err(CliError::Config(
                "--case3 needs the honeycomb lattice and exactly one --k".into(),
            ));
        }
        let pd = greens.pole_data(&points[0], level)?;
        if !pd.aligned() {
            return Err(CliError::Config(format!(
                "level {} is Case 1 at this k; no finite limit",
                num(level)
            )));
        }
        alpha = pd.left_limit_minus;
    }
    let rows: Vec<BandRow> = points
        .par_iter()
        .enumerate()
        .map(|(i, k)| rows_at(&greens, cfg.lattice, i, k, alpha, cfg.jmax))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    let out = cfg.output_path.as_deref();
    match cfg.output_format {
        OutputFormat::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.k_index.to_string(),
                        num(r.kx),
                        num(r.ky),
                        r.j.to_string(),
                        num(r.value.0),
                        r.multiplicity.to_string(),
                        r.provenance.clone(),
                    ]
                })
                .collect();
            write_csv(
                out,
                &[meta("bands", cfg, alpha)],
                &[
                    "k_index",
                    "kx",
                    "ky",
                    "j",
                    "value",
                    "multiplicity",
                    "provenance",
                ],
                &table,
                &[],
            )
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Body {
                alpha: Ext,
                rows: Vec<BandRow>,
            }
            write_json(
                out,
                &Doc {
                    schema: SCHEMA,
                    command: "bands",
                    config: cfg,
                    body: Body {
                        alpha: Ext(alpha),
                        rows,
                    },
                },
            )
        }
    }
}

#[derive(Serialize)]
struct RangeRow {
    band: usize,
    min: Ext,
    max: Ext,
    argmin: [f64; 2],
    argmax: [f64; 2],
}

#[derive(Serialize)]
struct ScanRow {
    alpha: f64,
    intervals: Vec<[Ext; 2]>,
    predicted: Vec<[Ext; 2]>,
    observed: Vec<RangeRow>,
    gap_1_2: f64,
    flags: Vec<String>,
}

/// One row per alpha with the merged spectrum intervals.
pub fn spectrum_scan(
    cfg: &RunConfig,
    alpha_min: f64,
    alpha_max: f64,
    steps: usize,
    polish: Option<usize>,
) -> Result<(), CliError> {
    if !(alpha_min.is_finite() && alpha_max.is_finite() && alpha_min < alpha_max) {
        return Err(CliError::Config("need finite alpha_min < alpha_max".into()));
    }
    if steps < 2 {
        return Err(CliError::Config("steps must be at least 2".into()));
    }
    if cfg.mesh_n < 8 {
        return Err(CliError::Config("spectrum-scan needs mesh_n >= 8".into()));
    }
    let polish = polish.unwrap_or(cfg.jmax);
    if polish > cfg.jmax {
        return Err(CliError::Config("polish_bands exceeds jmax".into()));
    }
    let (_, greens) = setup(cfg)?;
    let mesh = BandMesh::new(&greens, cfg.mesh_n, cfg.jmax)?;
    let alphas = linspace(alpha_min, alpha_max, steps);
    let reports = scan(&mesh, cfg.lattice, &alphas, polish)?;
    let crossover = if cfg.lattice == LatticeKind::Triangular {
        gap_closing_alpha(&reports)
    } else {
        None
    };
    let pairs = |v: &[dirac_scatter::spectrum::Interval<f64>]| {
        v.iter().map(|i| [Ext(i.lo), Ext(i.hi)]).collect::<Vec<_>>()
    };
    let rows: Vec<ScanRow> = reports
        .iter()
        .map(|r| ScanRow {
            alpha: r.alpha,
            intervals: pairs(&r.intervals),
            predicted: pairs(&r.predicted),
            observed: r
                .observed
                .iter()
                .map(|b| RangeRow {
                    band: b.band,
                    min: Ext(b.min),
                    max: Ext(b.max),
                    argmin: [b.argmin.x, b.argmin.y],
                    argmax: [b.argmax.x, b.argmax.y],
                })
                .collect(),
            gap_1_2: r.gap_1_2(),
            flags: r.flags.clone(),
        })
        .collect();
    let out = cfg.output_path.as_deref();
    match cfg.output_format {
        OutputFormat::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut v = vec![num(r.alpha), r.intervals.len().to_string()];
                    for i in 0..3 {
                        match r.intervals.get(i) {
                            Some([lo, hi]) => v.extend([num(lo.0), num(hi.0)]),
                            None => v.extend([String::new(), String::new()]),
                        }
                    }
                    v.push(num(r.gap_1_2));
                    v.push(r.flags.join("|"));
                    v
                })
                .collect();
            let trailer = match (cfg.lattice, crossover) {
                (LatticeKind::Triangular, Some(a)) => vec![format!("gap_closing_alpha={}", num(a))],
                (LatticeKind::Triangular, None) => vec!["gap_closing_alpha=none".to_string()],
                _ => vec![],
            };
            write_csv(
                out,
                &[
                    meta("spectrum-scan", cfg, cfg.alpha.0),
                    format!(
                        "alpha_min={} alpha_max={} steps={} polish_bands={}",
                        num(alpha_min),
                        num(alpha_max),
                        steps,
                        polish
                    ),
                ],
                &[
                    "alpha",
                    "n_intervals",
                    "lo1",
                    "hi1",
                    "lo2",
                    "hi2",
                    "lo3",
                    "hi3",
                    "gap_1_2",
                    "flags",
                ],
                &table,
                &trailer,
            )
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Body {
                alpha_min: f64,
                alpha_max: f64,
                steps: usize,
                polish_bands: usize,
                gap_closing_alpha: Option<f64>,
                rows: Vec<ScanRow>,
            }
            let body = Body {
                alpha_min,
                alpha_max,
                steps,
                polish_bands: polish,
                gap_closing_alpha: crossover,
                rows,
            };
            write_json(
                out,
                &Doc {
                    schema: SCHEMA,
                    command: "spectrum-scan",
                    config: cfg,
                    body,
                },
            )
        }
    }
}

/// Cone slopes at `K` for the band pair starting at `pair`.
pub fn cone(cfg: &RunConfig, pair: Option<usize>, deltas: &[f64]) -> Result<(), CliError> {
    if deltas.is_empty()
        || deltas.iter().any(|d| !(*d > 0.0 && d.is_finite()))
        || deltas.windows(2).any(|w| w[0] <= w[1])
    {
        return Err(CliError::Config(
            "deltas must be positive and strictly descending".into(),
        ));
    }
    if !cfg.alpha.0.is_finite() {
        return Err(CliError::Config("cone needs a finite alpha".into()));
    }
    let lower = pair.unwrap_or(match cfg.lattice {
        LatticeKind::Triangular => 2,
        LatticeKind::Honeycomb => 1,
    });
    let (_, greens) = setup(cfg)?;
    let rep = cone_report(&greens, cfg.lattice, cfg.alpha.0, lower, deltas)?;
    let out = cfg.output_path.as_deref();
    match cfg.output_format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                report: &'a dirac_scatter::cone::ConeReport<f64>,
            }
            write_json(
                out,
                &Doc {
                    schema: SCHEMA,
                    command: "cone",
                    config: cfg,
                    body: Body { report: &rep },
                },
            )
        }
        OutputFormat::Csv => {
            let mut table = Vec::new();
            for s in &rep.samples {
                for (i, th) in s.directions.iter().enumerate() {
                    table.push(vec![
                        num(s.delta),
                        num(*th),
                        num(s.lower[i]),
                        num(s.upper[i]),
                    ]);
                }
            }
            let trailer: Vec<String> = rep
                .samples
                .iter()
                .map(|s| {
                    format!(
                        "delta={} isotropy_spread={} max_rel_error={}",
                        num(s.delta),
                        num(s.isotropy_spread),
                        num(s.max_rel_error)
                    )
                })
                .chain(std::iter::once(format!(
                    "convergence_order={}",
                    rep.convergence_order.map_or("none".to_string(), num)
                )))
                .collect();
            write_csv(
                out,
                &[
                    meta("cone", cfg, cfg.alpha.0),
                    format!(
                        "bands={},{} lambda_prime={} c_formula={}",
                        rep.bands.0,
                        rep.bands.1,
                        num(rep.lambda_prime),
                        num(rep.c_formula)
                    ),
                ],
                &["delta", "theta", "slope_lower", "slope_upper"],
                &table,
                &trailer,
            )
        }
    }
}

/// Direct `g_lambda(x, k)` evaluation, or pole data with `--pole`.
pub fn greens_probe(
    cfg: &RunConfig,
    lambda: f64,
    k: Option<&str>,
    x: Option<&str>,
    pole: bool,
) -> Result<(), CliError> {
    if !lambda.is_finite() {
        return Err(CliError::Config("lambda must be finite".into()));
    }
    let (lat, greens) = setup(cfg)?;
    let kv = match k {
        Some(s) => {
            let (a, b) = parse_pair(s)?;
            Vec2::new(a, b)
        }
        None => lat.gamma(),
    };
    let mom = lat.momentum(kv);
    let out = cfg.output_path.as_deref();
    let head = [meta("greens-probe", cfg, cfg.alpha.0)];
    if pole {
        let pd = greens.pole_data(&mom, lambda)?;
        let kk = mom.k();
        return match cfg.output_format {
            OutputFormat::Json => {
                #[derive(Serialize)]
                struct Body<'a> {
                    k: [f64; 2],
                    pole: &'a dirac_scatter::PoleData<f64>,
                    left_limit_minus: Ext,
                    aligned: bool,
                }
                let body = Body {
                    k: [kk.x, kk.y],
                    pole: &pd,
                    left_limit_minus: Ext(pd.left_limit_minus),
                    aligned: pd.aligned(),
                };
                write_json(
                    out,
                    &Doc {
                        schema: SCHEMA,
                        command: "greens-probe",
                        config: cfg,
                        body,
                    },
                )
            }
            OutputFormat::Csv => write_csv(
                out,
                &head,
                &[
                    "lambda_pole",
                    "kx",
                    "ky",
                    "mu",
                    "phase_sum_abs",
                    "regular_diag",
                    "regular_off_re",
                    "regular_off_im",
                    "left_limit_minus",
                    "aligned",
                ],
                &[vec![
                    num(pd.lambda_pole),
                    num(kk.x),
                    num(kk.y),
                    pd.mu.to_string(),
                    num(pd.phase_sum_abs),
                    num(pd.regular_diag),
                    num(pd.regular_offdiag.re),
                    num(pd.regular_offdiag.im),
                    num(pd.left_limit_minus),
                    pd.aligned().to_string(),
                ]],
                &[],
            ),
        };
    }
    let ev = match x {
        None => greens.g_diag(lambda, &mom, cfg.tolerance)?,
        Some(s) => {
            let p = if s.trim() == "x0" {
                lat.x0
            } else {
                let (a, b) = parse_pair(s)?;
                Vec2::new(a, b)
            };
            greens.g_offdiag(lambda, &mom, p, cfg.tolerance)?
        }
    };
    match cfg.output_format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                eval: &'a dirac_scatter::GreensEval<f64>,
            }
            write_json(
                out,
                &Doc {
                    schema: SCHEMA,
                    command: "greens-probe",
                    config: cfg,
                    body: Body { eval: &ev },
                },
            )
        }
        OutputFormat::Csv => write_csv(
            out,
            &head,
            &[
                "lambda",
                "kx",
                "ky",
                "x",
                "y",
                "re",
                "im",
                "tail_bound",
                "cutoff_radius",
            ],
            &[vec![
                num(ev.lambda),
                num(ev.k.k().x),
                num(ev.k.k().y),
                num(ev.x.x),
                num(ev.x.y),
                num(ev.value.re),
                num(ev.value.im),
                num(ev.tail_bound),
                num(ev.cutoff_radius),
            ]],
            &[],
        ),
    }
}
