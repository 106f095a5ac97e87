use std::path::Path;

use serde::Serialize;

use hexstar::analytic::{engine_m5_block, exact_engine_block_for, m5_block};
use hexstar::dynamics::{
    collapse_metrics, evolve_probabilities_with, regime_classifier, return_probability, time_grid, CollapseMetrics,
    Regime, TrajectoryStats,
};
use hexstar::entanglement::{schmidt_scan, Bipartition};
use hexstar::hamiltonian::ModelParams;
use hexstar::hilbert::{build_initial_state, embed_sector, Space, StateSpec, StateVector};
use hexstar::lattice::{build_geometry, build_group, Geometry, Irrep, N_SITES};
use hexstar::spectrum::{
    degeneracy_histogram_with, diagonalize_sector_with, find_crossover, ground_state_with, spectral_width,
    GroundStatePoint, SpectrumResult,
};
use hexstar::symmetry::{irrep_counts, multiplet_counts};

use crate::output::{json, num, write_atomic, Csv};
use crate::{Command, Failure, Format, RunConfig};

pub fn run(config: &RunConfig) -> Result<(), Failure> {
    let text = match &config.command {
        Command::Geometry => geometry(config),
        Command::SymmetryTables => symmetry_tables(config)?,
        Command::Spectrum => spectrum(config)?,
        Command::Degeneracy => degeneracy(config)?,
        Command::GroundScan {
            jz_from,
            jz_to,
            jz_points,
        } => ground_scan(config, *jz_from, *jz_to, *jz_points)?,
        Command::Dynamics => dynamics(config)?,
        Command::ReturnProb => return_prob(config)?,
        Command::Schmidt => schmidt(config)?,
        Command::AnalyticM5 => analytic_m5(config)?,
    };
    emit(config.output.as_deref(), &text)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write_atomic(p, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn params(config: &RunConfig) -> Result<ModelParams, Failure> {
    Ok(ModelParams::new(config.alpha, config.jz_over_j)?)
}

fn single_sector(config: &RunConfig) -> Result<i32, Failure> {
    config.sector.parse().map_err(|_| {
        Failure::Usage(format!("{} needs a single --sector", command_name(&config.command)))
    })
}

fn sectors(config: &RunConfig) -> Vec<i32> {
    match config.sector.parse::<i32>() {
        Ok(m) => vec![m],
        Err(_) => (-6..=6).rev().collect(),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::SymmetryTables => "symmetry-tables",
        Command::Spectrum => "spectrum",
        Command::Degeneracy => "degeneracy",
        Command::GroundScan { .. } => "ground-scan",
        Command::Dynamics => "dynamics",
        Command::ReturnProb => "return-prob",
        Command::Schmidt => "schmidt",
        Command::AnalyticM5 => "analytic-m5",
        Command::Geometry => "geometry",
    }
}

fn initial_state(config: &RunConfig) -> Result<(StateSpec, StateVector), Failure> {
    let spec: StateSpec = config
        .state
        .parse()
        .map_err(|e: hexstar::Error| Failure::State(e.to_string()))?;
    let state = build_initial_state(&spec).map_err(|e| Failure::State(e.to_string()))?;
    Ok((spec, state))
}

fn sector_spectrum(config: &RunConfig, m: i32) -> Result<SpectrumResult, Failure> {
    let p = params(config)?;
    let tol = config.tol_deg * spectral_width(&p)?;
    Ok(diagonalize_sector_with(m, &p, Some(tol))?)
}

fn geometry(config: &RunConfig) -> String {
    let g = build_geometry();
    #[derive(Serialize)]
    struct Site {
        site: usize,
        ring: &'static str,
        x: f64,
        y: f64,
    }
    let sites: Vec<Site> = (0..N_SITES)
        .map(|i| Site {
            site: i,
            ring: if Geometry::is_outer(i) { "outer" } else { "inner" },
            x: g.positions[i][0],
            y: g.positions[i][1],
        })
        .collect();
    match config.format {
        Format::Json => json(&serde_json::json!({
            "config": config,
            "sites": sites,
            "distance_sq": g.distance_sq,
        })),
        Format::Csv => {
            let mut csv = Csv::new(config, &["site", "ring", "x", "y"]);
            for s in &sites {
                csv.row(&[s.site.to_string(), s.ring.to_string(), num(s.x), num(s.y)]);
            }
            csv.into_string()
        }
    }
}

fn e_cell(irrep: Irrep, n: u64) -> String {
    if irrep.dim() == 2 {
        format!("2x{n}")
    } else {
        n.to_string()
    }
}

fn symmetry_tables(config: &RunConfig) -> Result<String, Failure> {
    let group = build_group(&build_geometry())?;
    let counts = irrep_counts(&group)?;
    let multiplets = multiplet_counts(&counts)?;
    if config.format == Format::Json {
        let by_irrep = |f: &dyn Fn(Irrep) -> serde_json::Value| -> serde_json::Map<String, serde_json::Value> {
            Irrep::ALL.iter().map(|&r| (r.label().to_string(), f(r))).collect()
        };
        let irreps = by_irrep(&|r| (-6..=6).rev().map(|m| counts.get(r, m)).collect());
        let mults = by_irrep(&|r| (0..=6u32).rev().map(|s| multiplets.get(r, s)).collect());
        return Ok(json(&serde_json::json!({
            "config": config,
            "irrep_counts": {"sectors": (-6..=6).rev().collect::<Vec<i32>>(), "counts": irreps},
            "multiplets": {"spins": (0..=6).rev().collect::<Vec<u32>>(), "counts": mults},
        })));
    }
    let mut header = vec!["table", "row"];
    header.extend(Irrep::ALL.iter().map(|r| r.label()));
    header.push("total");
    let mut csv = Csv::new(config, &header);
    csv.comment("E-type cells are written as 2xN: N copies of a two-dimensional irrep");
    for m in (-6..=6).rev() {
        let mut row = vec!["irreps".to_string(), format!("M={m}")];
        row.extend(Irrep::ALL.iter().map(|&r| e_cell(r, counts.get(r, m))));
        row.push(counts.states_in_sector(m).to_string());
        csv.row(&row);
    }
    let mut row = vec!["irreps".to_string(), "total".to_string()];
    row.extend(Irrep::ALL.iter().map(|&r| e_cell(r, counts.total(r))));
    row.push(Irrep::ALL.iter().map(|&r| r.dim() as u64 * counts.total(r)).sum::<u64>().to_string());
    csv.row(&row);
    for s in (0..=6u32).rev() {
        let mut row = vec!["multiplets".to_string(), format!("S={s}")];
        row.extend(Irrep::ALL.iter().map(|&r| e_cell(r, multiplets.get(r, s))));
        row.push(multiplets.total(s).to_string());
        csv.row(&row);
    }
    Ok(csv.into_string())
}

fn spectrum(config: &RunConfig) -> Result<String, Failure> {
    #[derive(Serialize)]
    struct Level {
        m: i32,
        index: usize,
        energy: f64,
        irrep: Irrep,
        spin: Option<u32>,
        cluster: usize,
    }
    let mut levels = Vec::new();
    for m in sectors(config) {
        let spec = sector_spectrum(config, m)?;
        for (c, range) in spec.clusters.iter().enumerate() {
            for k in range.clone() {
                levels.push(Level {
                    m,
                    index: k,
                    energy: spec.eigenvalues[k],
                    irrep: spec.labels[k].irrep,
                    spin: spec.labels[k].spin,
                    cluster: c,
                });
            }
        }
    }
    Ok(match config.format {
        Format::Json => json(&serde_json::json!({"config": config, "levels": levels})),
        Format::Csv => {
            let mut csv = Csv::new(config, &["M", "index", "energy", "irrep", "S", "cluster"]);
            for l in &levels {
                csv.row(&[
                    l.m.to_string(),
                    l.index.to_string(),
                    num(l.energy),
                    l.irrep.to_string(),
                    l.spin.map_or(String::new(), |s| s.to_string()),
                    l.cluster.to_string(),
                ]);
            }
            csv.into_string()
        }
    })
}

fn degeneracy(config: &RunConfig) -> Result<String, Failure> {
    let h = degeneracy_histogram_with(&params(config)?, config.tol_deg)?;
    Ok(match config.format {
        Format::Json => json(&serde_json::json!({
            "config": config,
            "counts": h.counts,
            "eigenspaces": h.eigenspaces(),
            "total_states": h.total_states(),
            "tolerance": h.tolerance,
            "smallest_separation": h.smallest_separation,
        })),
        Format::Csv => {
            let mut csv = Csv::new(config, &["dimension", "count"]);
            csv.comment(&format!("tolerance {}", num(h.tolerance)));
            if let Some(s) = h.smallest_separation {
                csv.comment(&format!("smallest separation {}", num(s)));
            }
            for (d, c) in &h.counts {
                csv.row(&[d.to_string(), c.to_string()]);
            }
            csv.into_string()
        }
    })
}

fn ground_scan(config: &RunConfig, from: f64, to: f64, points: usize) -> Result<String, Failure> {
    let grid: Vec<f64> = (0..points)
        .map(|k| from + (to - from) * k as f64 / (points - 1) as f64)
        .collect();
    let scan: Vec<GroundStatePoint> = grid
        .iter()
        .map(|&jz| Ok(ground_state_with(&ModelParams::new(config.alpha, jz)?, config.tol_deg)?))
        .collect::<Result<_, Failure>>()?;
    let mut crossover = None;
    for w in scan.windows(2) {
        if w[0].is_ferromagnetic() && !w[1].is_ferromagnetic() {
            crossover = Some(find_crossover(config.alpha, w[0].jz_over_j, w[1].jz_over_j, 1e-6)?);
            break;
        }
    }
    Ok(match config.format {
        Format::Json => json(&serde_json::json!({"config": config, "points": scan, "crossover": crossover})),
        Format::Csv => {
            let mut csv = Csv::new(config, &["jz_over_j", "energy", "degeneracy", "sectors", "labels"]);
            if let Some(c) = crossover {
                csv.comment(&format!("crossover {}", num(c)));
            }
            for p in &scan {
                let sectors: Vec<String> = p.sectors.iter().map(|m| m.to_string()).collect();
                let labels: Vec<String> = p.labels.iter().map(|l| l.to_string()).collect();
                csv.row(&[
                    num(p.jz_over_j),
                    num(p.energy),
                    p.degeneracy.to_string(),
                    sectors.join(";"),
                    labels.join(";"),
                ]);
            }
            csv.into_string()
        }
    })
}

#[derive(Serialize)]
struct DynamicsStats<'a> {
    config: &'a RunConfig,
    sector: i32,
    dimension: usize,
    sector_weight: f64,
    #[serde(flatten)]
    stats: TrajectoryStats,
    regime: Regime,
    classes: &'a [Vec<usize>],
    collapse: CollapseMetrics,
}

fn dynamics(config: &RunConfig) -> Result<String, Failure> {
    let m = single_sector(config)?;
    let (_, state) = initial_state(config)?;
    let spec = sector_spectrum(config, m)?;
    let times = time_grid(config.t_max, config.t_steps);
    let traj = evolve_probabilities_with(&state, &spec, &times, config.tol_support)?;
    let stats = DynamicsStats {
        config,
        sector: m,
        dimension: traj.dim(),
        sector_weight: traj.sector_weight,
        stats: traj.stats,
        regime: regime_classifier(&traj),
        classes: &traj.classes,
        collapse: collapse_metrics(&traj),
    };
    if config.format == Format::Json {
        return Ok(json(&stats));
    }
    if let Some(path) = &config.output {
        emit(Some(&path.with_extension("stats.json")), &json(&stats))?;
    }
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..traj.dim()).map(|f| format!("p_{f}")))
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(config, &header_refs);
    for (k, &t) in times.iter().enumerate() {
        let mut row = Vec::with_capacity(traj.dim() + 1);
        row.push(num(t));
        row.extend((0..traj.dim()).map(|f| num(traj.probs[f][k])));
        csv.row(&row);
    }
    Ok(csv.into_string())
}

fn return_prob(config: &RunConfig) -> Result<String, Failure> {
    let m = single_sector(config)?;
    let (_, state) = initial_state(config)?;
    let spec = sector_spectrum(config, m)?;
    let times = time_grid(config.t_max, config.t_steps);
    let series = return_probability(&state, &spec, &times)?;
    Ok(match config.format {
        Format::Json => json(&serde_json::json!({"config": config, "times": times, "return_probability": series})),
        Format::Csv => {
            let mut csv = Csv::new(config, &["t", "p_return"]);
            for (t, p) in times.iter().zip(&series) {
                csv.row(&[num(*t), num(*p)]);
            }
            csv.into_string()
        }
    })
}

fn schmidt(config: &RunConfig) -> Result<String, Failure> {
    let state = if config.state == "groundstate" {
        let p = params(config)?;
        let gs = ground_state_with(&p, config.tol_deg)?;
        let m = if gs.sectors.contains(&0) {
            0
        } else {
            *gs.sectors.iter().max().expect("ground space is nonempty")
        };
        let spec = sector_spectrum(config, m)?;
        embed_sector(&StateVector::from_real(Space::Sector(m), &spec.vector(0))?)?
    } else {
        initial_state(config)?.1
    };
    let ranks = schmidt_scan(&state)?;
    let (min_mask, min_rank) = ranks
        .iter()
        .copied()
        .min_by_key(|&(mask, r)| (r, mask))
        .expect("nonempty scan");
    let entangled = min_rank >= 2;
    Ok(match config.format {
        Format::Json => json(&serde_json::json!({
            "config": config,
            "entangled": entangled,
            "min_rank": min_rank,
            "min_mask": min_mask,
            "ranks": ranks.iter().map(|&(mask, rank)| serde_json::json!({"mask": mask, "rank": rank})).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut csv = Csv::new(config, &["mask", "size_b", "rank"]);
            csv.comment(&format!("entangled {entangled} (minimum rank {min_rank} at mask {min_mask})"));
            for (mask, rank) in &ranks {
                let cut = Bipartition { mask: *mask };
                csv.row(&[mask.to_string(), cut.size_b().to_string(), rank.to_string()]);
            }
            csv.into_string()
        }
    })
}

fn analytic_m5(config: &RunConfig) -> Result<String, Failure> {
    let p = params(config)?;
    let block = m5_block(config.alpha, config.jz_over_j)?;
    let engine = engine_m5_block(&p)?;
    let (values, _) = block.eigen();
    let mut max_diff = 0.0f64;
    for r in 0..2 {
        for c in 0..2 {
            max_diff = max_diff.max((block.matrix[r][c] - engine[r][c]).abs());
        }
    }
    let exact = exact_engine_block_for(&p)?
        .map(|b| b.map(|row| row.map(|x| x.to_string())));
    let eigen_gap = values[1] - values[0];
    Ok(match config.format {
        Format::Json => json(&serde_json::json!({
            "config": config,
            "closed_form": block.matrix,
            "engine": engine,
            "max_abs_difference": max_diff,
            "delta_e": block.delta_e,
            "delta_e_from_eigenvalues": eigen_gap,
            "lower_is_outer": block.lower_is_outer,
            "exact_engine": exact,
        })),
        Format::Csv => {
            let mut csv = Csv::new(config, &["quantity", "value"]);
            let names = [["h_outer_outer", "h_outer_inner"], ["h_inner_outer", "h_inner_inner"]];
            for r in 0..2 {
                for c in 0..2 {
                    csv.row(&[format!("closed_form.{}", names[r][c]), num(block.matrix[r][c])]);
                }
            }
            for r in 0..2 {
                for c in 0..2 {
                    csv.row(&[format!("engine.{}", names[r][c]), num(engine[r][c])]);
                }
            }
            if let Some(exact) = &exact {
                for r in 0..2 {
                    for c in 0..2 {
                        csv.row(&[format!("exact.{}", names[r][c]), exact[r][c].clone()]);
                    }
                }
            }
            csv.row(&["max_abs_difference".to_string(), num(max_diff)]);
            csv.row(&["delta_e".to_string(), num(block.delta_e)]);
            csv.row(&["delta_e_from_eigenvalues".to_string(), num(eigen_gap)]);
            csv.row(&["lower_is_outer".to_string(), block.lower_is_outer.to_string()]);
            csv.into_string()
        }
    })
}
