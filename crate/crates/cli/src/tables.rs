//! Reproduction of the experiment tables: convergence factors (theoretical
//! vs. measured) and average iteration counts over window counts.

use std::fmt;
use std::fs;
use std::path::PathBuf;

use dabsor_core::dabsor::{measure_dpocf, static_iteration, IterationParams, WindowPlan};

use crate::config::ExperimentConfig;
use crate::experiment::{execute_windowed, prepare, ExperimentError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableId {
    T3,
    T4,
    T5,
    T6,
    T7,
    T8,
    T9,
    T10,
}

impl TableId {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T3" => Some(Self::T3),
            "T4" => Some(Self::T4),
            "T5" => Some(Self::T5),
            "T6" => Some(Self::T6),
            "T7" => Some(Self::T7),
            "T8" => Some(Self::T8),
            "T9" => Some(Self::T9),
            "T10" => Some(Self::T10),
            _ => None,
        }
    }

    fn grid(self) -> usize {
        match self {
            Self::T3 | Self::T4 | Self::T7 | Self::T8 => 12,
            Self::T5 | Self::T6 | Self::T9 | Self::T10 => 24,
        }
    }

    fn precond(self) -> &'static str {
        match self {
            Self::T3 | Self::T5 | Self::T7 | Self::T9 => "q1",
            Self::T4 | Self::T6 | Self::T8 | Self::T10 => "q2",
        }
    }

    fn is_factor_table(self) -> bool {
        matches!(self, Self::T3 | Self::T4 | Self::T5 | Self::T6)
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::T3 => "T3",
            Self::T4 => "T4",
            Self::T5 => "T5",
            Self::T6 => "T6",
            Self::T7 => "T7",
            Self::T8 => "T8",
            Self::T9 => "T9",
            Self::T10 => "T10",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// 12x12 grid, orders 1..=3; fits an interactive time budget.
    Desk,
    /// The table's own grid and all six orders.
    Full,
}

impl Scale {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "desk" => Some(Self::Desk),
            "full" => Some(Self::Full),
            _ => None,
        }
    }
}

/// Cells whose runs exceeded the sweep cap render as a sentinel.
const SENTINEL: &str = "---";

const FACTOR_WINDOW_COUNTS: [usize; 6] = [6, 12, 20, 30, 40, 60];
const ITERATION_WINDOW_COUNTS: [usize; 6] = [1, 2, 3, 4, 5, 6];

pub struct TableResult {
    pub csv: String,
    pub path: PathBuf,
}

/// Computes one table and writes `<id>.csv` into the output directory.
pub fn reproduce_table(
    id: TableId,
    scale: Scale,
    base: &ExperimentConfig,
) -> Result<TableResult, ExperimentError> {
    let (grid, orders): (usize, Vec<usize>) = match scale {
        Scale::Desk => (12, (1..=3).collect()),
        Scale::Full => (id.grid(), (1..=6).collect()),
    };
    let mut cfg = base.clone();
    cfg.grid = grid;
    cfg.precond = id.precond().to_string();
    cfg.omega = None;
    cfg.tau = None;
    cfg.optimal = true;

    let csv = if id.is_factor_table() {
        factor_table(&cfg, &orders)?
    } else {
        iteration_table(&cfg, &orders)?
    };

    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join(format!("{id}.csv"));
    fs::write(&path, &csv)?;
    Ok(TableResult { csv, path })
}

fn header(orders: &[usize], trailing_nou: bool) -> String {
    let mut line = if trailing_nou { "NoW".to_string() } else { String::new() };
    for o in orders {
        line.push_str(&format!(",BDF({o})"));
    }
    if trailing_nou {
        line.push_str(",NoU");
    }
    line.push('\n');
    line
}

fn factor_table(cfg: &ExperimentConfig, orders: &[usize]) -> Result<String, ExperimentError> {
    let mut dtocf = Vec::new();
    let mut apocf = Vec::new();
    let mut dpocf: Vec<Vec<String>> = vec![Vec::new(); FACTOR_WINDOW_COUNTS.len()];

    for &order in orders {
        let mut run_cfg = cfg.clone();
        run_cfg.order = order;
        let prep = prepare(&run_cfg)?;
        dtocf.push(format!("{}", prep.optimal.rho_opt));

        let constants = dabsor_core::stokes::AnalyticConstants::default();
        let blocks = dabsor_core::stokes::assemble(prep.sys.grid)?;
        let b = dabsor_core::stokes::rhs_sequence(
            &blocks,
            &constants,
            run_cfg.t_start + run_cfg.dt,
            run_cfg.dt,
            1,
        )
        .pop()
        .expect("one level");
        let params =
            IterationParams::new(prep.omega, prep.tau).with_limits(run_cfg.max_iters, run_cfg.tol);
        apocf.push(match static_iteration(&prep.sys, prep.sigma, &params, &b) {
            Ok(out) => format!("{}", out.measured_factor),
            Err(_) => SENTINEL.to_string(),
        });

        for (row, &windows) in FACTOR_WINDOW_COUNTS.iter().enumerate() {
            run_cfg.windows = windows;
            let plan = WindowPlan::new(run_cfg.t_start, run_cfg.t_end, run_cfg.dt, windows)?;
            eprintln!("  [table] order {order}, {windows} windows ...");
            let cell = match execute_windowed(&run_cfg, &prep, &plan) {
                Ok(out) => match measure_dpocf(&out.histories) {
                    Ok(v) => format!("{v}"),
                    Err(_) => SENTINEL.to_string(),
                },
                Err(_) => SENTINEL.to_string(),
            };
            dpocf[row].push(cell);
        }
    }

    let mut csv = header(orders, false);
    csv.push_str(&format!("DTOCF,{}\n", dtocf.join(",")));
    csv.push_str(&format!("APOCF,{}\n", apocf.join(",")));
    for (row, &windows) in FACTOR_WINDOW_COUNTS.iter().enumerate() {
        csv.push_str(&format!("DPOCF({windows}),{}\n", dpocf[row].join(",")));
    }
    Ok(csv)
}

fn iteration_table(cfg: &ExperimentConfig, orders: &[usize]) -> Result<String, ExperimentError> {
    let mut rows: Vec<Vec<String>> = vec![Vec::new(); ITERATION_WINDOW_COUNTS.len()];
    let mut nou: Vec<usize> = Vec::new();

    for (row, &windows) in ITERATION_WINDOW_COUNTS.iter().enumerate() {
        let plan = WindowPlan::new(cfg.t_start, cfg.t_end, cfg.dt, windows)?;
        let dim_per_level = 3 * cfg.grid * cfg.grid;
        nou.push(dim_per_level * plan.window_sizes[0]);
        for &order in orders {
            let mut run_cfg = cfg.clone();
            run_cfg.order = order;
            run_cfg.windows = windows;
            let prep = prepare(&run_cfg)?;
            eprintln!("  [table] order {order}, {windows} windows ...");
            let cell = match execute_windowed(&run_cfg, &prep, &plan) {
                Ok(out) => format!("{}", out.average_iterations()),
                Err(_) => SENTINEL.to_string(),
            };
            rows[row].push(cell);
        }
    }

    let mut csv = header(orders, true);
    for (row, &windows) in ITERATION_WINDOW_COUNTS.iter().enumerate() {
        csv.push_str(&format!("{windows},{},{}\n", rows[row].join(","), nou[row]));
    }
    Ok(csv)
}
