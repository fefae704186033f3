//! Figure commands: each renders one or more named CSV files from a resolved config.

use std::fmt;
use std::str::FromStr;

use qndsim_core::estimators::{self, Cell, SingleNodeRow};
use qndsim_core::sorter::{herald_confusion_matrix, run_sorter};
use qndsim_core::{montecarlo, ExperimentConfig, Quantity, Result, RunMode};

use crate::table::{value_stderr_table, Field, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Table1,
    FigS1,
    Sorter,
}

impl Figure {
    pub const ALL: [Figure; 6] = [
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Table1,
        Figure::FigS1,
        Figure::Sorter,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Table1 => "table1",
            Figure::FigS1 => "figS1",
            Figure::Sorter => "sorter",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown figure `{s}`"))
    }
}

/// One output file: name relative to the output directory and its contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

fn artifact(name: &str, table: &Table) -> Artifact {
    Artifact {
        name: name.to_string(),
        contents: table.to_csv(),
    }
}

/// Per-μ cells of the cascade table in the config's run mode.
fn cascade_rows(cfg: &ExperimentConfig) -> Result<Vec<(f64, [Cell; 9])>> {
    Ok(match cfg.mode {
        RunMode::Exact => estimators::sweep_estimates(cfg)?
            .rows
            .into_iter()
            .map(|r| (r.mu, r.cells))
            .collect(),
        RunMode::MonteCarlo => montecarlo::sweep(cfg)?.into_iter().map(|e| (e.mu, e.cells)).collect(),
    })
}

fn pick(rows: &[(f64, [Cell; 9])], quantities: &[Quantity]) -> Vec<(f64, Vec<Cell>)> {
    rows.iter()
        .map(|(mu, cells)| {
            let picked = quantities
                .iter()
                .map(|q| cells[Quantity::ALL.iter().position(|x| x == q).expect("listed")])
                .collect();
            (*mu, picked)
        })
        .collect()
}

fn columns(quantities: &[Quantity]) -> Vec<&'static str> {
    quantities.iter().map(Quantity::column).collect()
}

fn fig2(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let rows = cascade_rows(cfg)?;
    let main = [Quantity::Up1, Quantity::Up2, Quantity::Up1GivenUp2, Quantity::Up2GivenUp1];
    let click = [Quantity::Up1GivenClick, Quantity::Up2GivenClick];
    let clean = cascade_rows(&cfg.without_hbt_dark_counts())?;

    let mut names = columns(&click);
    names.extend(["p_up1_given_click_no_dark", "p_up2_given_click_no_dark"]);
    let merged = pick(&rows, &click)
        .into_iter()
        .zip(pick(&clean, &click))
        .map(|((mu, mut a), (_, b))| {
            a.extend(b);
            (mu, a)
        });
    Ok(vec![
        artifact("fig2.csv", &value_stderr_table(&columns(&main), pick(&rows, &main))),
        artifact("fig2_click.csv", &value_stderr_table(&names, merged)),
    ])
}

fn fig3(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let rows = cascade_rows(cfg)?;
    let q = [
        Quantity::Up1GivenClick,
        Quantity::Up2GivenClick,
        Quantity::OrGivenClick,
        Quantity::AndGivenClick,
    ];
    // The AND dark count is ~1e-5, out of reach for sampling, so SNR is always exact.
    let s = estimators::snr(cfg)?;
    let mut snr = Table::new(["quantity", "value", "stderr"]);
    for (name, v) in [
        ("mu", s.mu),
        ("snr1", s.snr1),
        ("snr2", s.snr2),
        ("snr_and", s.snr_and),
        ("dc1", s.dc1),
        ("dc2", s.dc2),
        ("dc_and", s.dc_and),
        ("snr_and_over_snr1", s.and_over_snr1()),
        ("snr_and_over_snr2", s.and_over_snr2()),
    ] {
        snr.push(vec![Field::Text(name.into()), v.into(), 0.0.into()]);
    }
    Ok(vec![
        artifact("fig3.csv", &value_stderr_table(&columns(&q), pick(&rows, &q))),
        artifact("fig3_snr.csv", &snr),
    ])
}

fn fig4(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let rows = cascade_rows(cfg)?;
    let q = [Quantity::Up2GivenClick, Quantity::Up2GivenUp1AndClick];
    Ok(vec![artifact("fig4.csv", &value_stderr_table(&columns(&q), pick(&rows, &q)))])
}

fn fig_s1(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let node = |n| -> Result<Vec<SingleNodeRow>> {
        match cfg.mode {
            RunMode::Exact => estimators::single_node_sweep(cfg, n),
            RunMode::MonteCarlo => montecarlo::single_node_sweep(cfg, n),
        }
    };
    let (a, b) = (node(1)?, node(2)?);
    let rows = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x.mu, vec![x.p_up, x.p_up_given_click, y.p_up, y.p_up_given_click]));
    let names = ["p_up1", "p_up1_given_click", "p_up2", "p_up2_given_click"];
    Ok(vec![artifact("figS1.csv", &value_stderr_table(&names, rows))])
}

fn table1(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let mu = cfg.table1_mu;
    let rows = match cfg.mode {
        RunMode::Exact => estimators::g2_table(cfg, mu)?,
        RunMode::MonteCarlo => montecarlo::g2_table(cfg, mu, cfg.trials)?,
    };
    let mut t = Table::new([
        "mu",
        "condition",
        "g2_zero",
        "g2_tau",
        "g2_zero_stderr",
        "g2_tau_stderr",
        "tau_analytic",
    ]);
    for r in rows {
        t.push(vec![
            mu.into(),
            Field::Text(r.condition.label().into()),
            Field::Num(r.g2_zero.value),
            Field::Num(r.g2_tau.value),
            Field::Num(r.g2_zero.stderr),
            Field::Num(r.g2_tau.stderr),
            Field::Text(r.tau_analytic.to_string()),
        ]);
    }
    Ok(vec![artifact("table1.csv", &t)])
}

/// The sorter is evaluated exactly in both modes (branch enumeration is cheap).
fn sorter(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let s = &cfg.sorter;
    let mut heralds = Table::new([
        "label",
        "probability",
        "fidelity",
        "probability_stderr",
        "fidelity_stderr",
    ]);
    for r in run_sorter(s)? {
        heralds.push(vec![
            (r.label as f64).into(),
            r.probability.into(),
            Field::Num(r.fidelity),
            0.0.into(),
            Field::Num(r.fidelity.map(|_| 0.0)),
        ]);
    }

    let labels = s.labels();
    let mut header = vec!["n".to_string()];
    header.extend((0..labels).map(|l| format!("p_label_{l}")));
    header.extend((0..labels).map(|l| format!("p_label_{l}_stderr")));
    let mut confusion = Table {
        header,
        rows: Vec::new(),
    };
    for (n, row) in herald_confusion_matrix(s, 0..=s.confusion_max_n)?.into_iter().enumerate() {
        let mut fields = vec![Field::from(n as f64)];
        fields.extend(row.iter().map(|&p| Field::from(p)));
        fields.extend(row.iter().map(|_| Field::from(0.0)));
        confusion.push(fields);
    }
    Ok(vec![
        artifact("sorter.csv", &heralds),
        artifact("sorter_confusion.csv", &confusion),
    ])
}

pub fn render(figure: Figure, cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    match figure {
        Figure::Fig2 => fig2(cfg),
        Figure::Fig3 => fig3(cfg),
        Figure::Fig4 => fig4(cfg),
        Figure::Table1 => table1(cfg),
        Figure::FigS1 => fig_s1(cfg),
        Figure::Sorter => sorter(cfg),
    }
}
