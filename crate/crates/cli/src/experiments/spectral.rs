use super::{num, Outcome, Table};
use crate::bundle::Check;
use crate::config::{at_least, require, ExperimentConfig};
use crate::plot::{PlotSpec, Series, Style};
use crate::CliError;
use fdehydro_core::ensemble::{
    build_generator, canonical_expectation_g, enumerate_canonical, gap_cells, kappa0_from_rows, kernel_dimension,
    GapRow,
};
use num_rational::Ratio;
use rayon::prelude::*;
use serde_json::json;

struct Cell {
    row: GapRow,
    kernel: usize,
    structural: bool,
}

fn cell(ell: usize, k: u32) -> Result<Cell, CliError> {
    let b = enumerate_canonical(ell, k)?;
    let l = build_generator(&b)?;
    let structural = l == l.transpose() && l.row_iter().all(|r| r.sum() == 0.0);
    Ok(Cell { row: GapRow::compute(ell, k)?, kernel: kernel_dimension(&b)?, structural })
}

pub(crate) fn spectral_gap(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let max_sum = at_least(cfg.max_sum, 3, "max_sum")?;
    let ell_max = at_least(cfg.ell_max, 1, "ell_max")?;
    let k_max = require(cfg.k_max, "k_max")?;

    let cells = gap_cells(max_sum).into_par_iter().map(|(ell, k)| cell(ell, k)).collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<GapRow> = cells.iter().map(|c| c.row).collect();
    let mut gaps = Table::new(&["ell", "k", "states", "gap", "gap_scaled"]);
    for r in &rows {
        gaps.row(&[r.ell.to_string(), r.k.to_string(), r.states.to_string(), num(r.gap), num(r.scaled_gap)]);
    }
    let min_scaled = rows.iter().map(|r| r.scaled_gap).fold(f64::INFINITY, f64::min);
    let kappa0 = kappa0_from_rows(&rows);
    let gap21 = rows.iter().find(|r| (r.ell, r.k) == (2, 1)).map(|r| r.gap);

    let pairs: Vec<(usize, u32)> = (1..=ell_max).flat_map(|ell| (0..=k_max).map(move |k| (ell, k))).collect();
    let expectations = pairs
        .par_iter()
        .map(|&(ell, k)| canonical_expectation_g(ell, k).map(|e| (ell, k, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut equivalence = Table::new(&["ell", "k", "brute_force", "formula", "exact_match"]);
    let mut mismatches = 0usize;
    for (ell, k, e) in &expectations {
        let formula =
            if *k == 0 { Ratio::from_integer(0) } else { Ratio::new(*k as u64, (*ell as u64 - 1) + *k as u64) };
        let exact = e.exact == Some(formula);
        mismatches += usize::from(!exact);
        let shown = e.exact.map_or_else(|| num(e.value), |r| r.to_string());
        equivalence.row(&[ell.to_string(), k.to_string(), shown, formula.to_string(), exact.to_string()]);
    }

    let nonpositive = rows.iter().filter(|r| !(r.gap > 0.0)).count();
    let bad_kernel = cells.iter().filter(|c| c.kernel != 1).count();
    let bad_structure = cells.iter().filter(|c| !c.structural).count();
    let checks = vec![
        Check::new(
            "every gap positive",
            nonpositive == 0 && !rows.is_empty(),
            format!("{nonpositive} of {} cells with gap <= 0", rows.len()),
        ),
        Check::new("gap(2,1) = 2", gap21.is_some_and(|g| (g - 2.0).abs() <= 1e-12), format!("gap(2,1) = {gap21:?}")),
        Check::new("generator kernel has dimension 1", bad_kernel == 0, format!("{bad_kernel} cells differ")),
        Check::new(
            "generator symmetric with zero row sums",
            bad_structure == 0,
            format!("{bad_structure} cells differ"),
        ),
        Check::new(
            "min gap*(ell+k)^2 positive",
            min_scaled > 0.0 && min_scaled.is_finite(),
            format!("min {min_scaled:.6}, kappa0 estimate {kappa0:.6}"),
        ),
        Check::new(
            "canonical expectation equals k/(ell-1+k) exactly",
            mismatches == 0,
            format!("{mismatches} of {} cells differ", expectations.len()),
        ),
    ];

    let plots = vec![PlotSpec::new("gap_scaled.svg", "scaled spectral gap", "k", "gap * (ell+k)^2")
        .with(Series::new("ell = 2", "gap_table.csv", "k", "gap_scaled", Style::Line).filtered("ell", 2))
        .with(Series::new("ell = 3", "gap_table.csv", "k", "gap_scaled", Style::Line).filtered("ell", 3))
        .with(Series::new("ell = 4", "gap_table.csv", "k", "gap_scaled", Style::Line).filtered("ell", 4))];

    Ok(Outcome {
        tables: vec![gaps.finish("gap_table.csv"), equivalence.finish("equivalence.csv")],
        metrics: json!({
            "max_sum": max_sum,
            "cells": rows.len(),
            "min_scaled_gap": min_scaled,
            "kappa0_estimate": kappa0,
            "gap_2_1": gap21,
            "equivalence_cells": expectations.len(),
        }),
        checks,
        plots,
    })
}
