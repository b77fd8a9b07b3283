//! Minimum-sample-size grids over (l_max, rho).

use nps_core::{min_sample_size, AlcConfig, DirichletParams, Result};

/// One prior's grid of minimum sample sizes: rows by `l_max`, columns by
/// `rho`.
pub struct TableGrid {
    pub prior: DirichletParams,
    pub lmax_values: Vec<f64>,
    pub rho_values: Vec<f64>,
    pub cells: Vec<Vec<u64>>,
}

pub fn run_grid(
    prior: &DirichletParams,
    lmax_values: &[f64],
    rho_values: &[f64],
    base: &AlcConfig,
) -> Result<TableGrid> {
    let mut cells = Vec::with_capacity(lmax_values.len());
    for &l_max in lmax_values {
        let mut row = Vec::with_capacity(rho_values.len());
        for &rho in rho_values {
            let cfg = AlcConfig {
                l_max,
                rho,
                ..*base
            };
            row.push(min_sample_size(prior, &cfg)?.n_min);
        }
        cells.push(row);
    }
    Ok(TableGrid {
        prior: *prior,
        lmax_values: lmax_values.to_vec(),
        rho_values: rho_values.to_vec(),
        cells,
    })
}

fn prior_label(prior: &DirichletParams) -> String {
    let a = prior.as_array();
    format!("({}, {}, {})", a[0], a[1], a[2])
}

pub fn render_markdown(grid: &TableGrid) -> String {
    let mut out = format!(
        "Minimum sample size, prior {}\n\n",
        prior_label(&grid.prior)
    );
    out.push_str("| l_max |");
    for rho in &grid.rho_values {
        out.push_str(&format!(" rho={rho} |"));
    }
    out.push_str("\n|------:|");
    for _ in &grid.rho_values {
        out.push_str("-------:|");
    }
    out.push('\n');
    for (l_max, row) in grid.lmax_values.iter().zip(&grid.cells) {
        out.push_str(&format!("| {l_max:.2} |"));
        for n in row {
            out.push_str(&format!(" {n} |"));
        }
        out.push('\n');
    }
    out
}

pub fn render_csv(grid: &TableGrid) -> String {
    let a = grid.prior.as_array();
    let mut out = format!("# prior = {},{},{}\n", a[0], a[1], a[2]);
    out.push_str("l_max");
    for rho in &grid.rho_values {
        out.push_str(&format!(",rho={rho}"));
    }
    out.push('\n');
    for (l_max, row) in grid.lmax_values.iter().zip(&grid.cells) {
        out.push_str(&format!("{l_max}"));
        for n in row {
            out.push_str(&format!(",{n}"));
        }
        out.push('\n');
    }
    out
}
