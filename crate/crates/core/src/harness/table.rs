//! The test × worldview summary matrix. Every cell asserts its defining
//! property on fresh random instances.

use rand::Rng;
use serde::Serialize;

use super::samplers::*;
use super::suites::{self, check_dp, check_no_amplification, either, ensure, eq, le, ranged};
use super::{summarize, sweep, Counterexample, Failure, Outcome};
use crate::constructions::optimal_dem_parity_model;
use crate::criteria::{
    construct_accuracy, impose_worldview, max_accuracy_under_dem_parity, worldview_holds, Worldview,
};
use crate::empirical::observed_disparity;
use crate::probability::random::{derive_seed, rng_from_seed};
use crate::probability::{apply_model, JointDistribution, Variable};
use crate::scalar::Scalar;

pub const OK: &str = "✓";
pub const SUBOPTIMAL: &str = "Necessarily suboptimal";
pub const AMPLIFICATION: &str = "Amplification allowed";

/// Row labels in display order.
pub const TABLE_TESTS: [&str; 3] = ["demographic parity", "equalized odds", "predictive parity"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    DpWae,
    DpWysiwyg,
    EoWae,
    EoWysiwyg,
    PpWae,
    PpWysiwyg,
}

const CELLS: [Cell; 6] = [Cell::DpWae, Cell::DpWysiwyg, Cell::EoWae, Cell::EoWysiwyg, Cell::PpWae, Cell::PpWysiwyg];

impl Cell {
    fn test(self) -> &'static str {
        match self {
            Cell::DpWae | Cell::DpWysiwyg => TABLE_TESTS[0],
            Cell::EoWae | Cell::EoWysiwyg => TABLE_TESTS[1],
            Cell::PpWae | Cell::PpWysiwyg => TABLE_TESTS[2],
        }
    }

    fn worldview(self) -> Worldview {
        match self {
            Cell::DpWae | Cell::EoWae | Cell::PpWae => Worldview::Wae,
            _ => Worldview::Wysiwyg,
        }
    }

    fn outcome(self) -> &'static str {
        match self {
            Cell::DpWae | Cell::EoWysiwyg => OK,
            Cell::DpWysiwyg => SUBOPTIMAL,
            Cell::EoWae | Cell::PpWae | Cell::PpWysiwyg => AMPLIFICATION,
        }
    }

    fn property(self) -> &'static str {
        match self {
            Cell::DpWae => "no amplification; Yp := Yc passes and the accuracy bound is attained",
            Cell::DpWysiwyg => "no amplification; accuracy <= 1 - tv(Yc..)/2 < 1, attained by the optimal model",
            Cell::EoWae => "counterexample passes equalized odds and amplifies",
            Cell::EoWysiwyg => "no amplification; Yp := Yo passes",
            Cell::PpWae | Cell::PpWysiwyg => {
                "adversary passes predictive parity, output disparity 1 - epsilon, amplifies"
            }
        }
    }

    fn trial<T: Scalar>(self, seed: u64) -> Outcome {
        match self {
            Cell::DpWae => dp_cell::<T>(seed, &Worldview::Wae),
            Cell::DpWysiwyg => dp_cell::<T>(seed, &Worldview::Wysiwyg),
            Cell::EoWae => {
                suites::t4::<T>(seed)?;
                let dist: JointDistribution<T> = crate::constructions::eqodds_amplifying_counterexample(seed)?;
                let wae = worldview_holds(&dist, &Worldview::Wae, &T::zero())?;
                ensure(wae.holds, &dist, || "counterexample violates WAE".into())
            }
            Cell::EoWysiwyg => suites::t3::<T>(seed),
            Cell::PpWae | Cell::PpWysiwyg => {
                let mut rng = rng_from_seed(seed);
                let (dist, _) = suites::pp_instance::<T>(&mut rng)?;
                suites::pp_amplifies(&mut rng, &dist, &self.worldview())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCell {
    pub test: String,
    pub worldview: String,
    /// Table entry: `✓`, `Necessarily suboptimal` or `Amplification allowed`.
    pub outcome: String,
    pub property: String,
    pub trials: usize,
    pub failures: usize,
}

/// One demographic-parity model plus the optimal one, on a base satisfying `wv`.
fn dp_cell<T: Scalar>(seed: u64, wv: &Worldview) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let (yo, yp) = (ranged(&mut rng), ranged(&mut rng));
    let mut base = base_observed::<T>(&mut rng, yo.clone(), yp);
    while observed_disparity(&base).is_zero() {
        let yp = ranged(&mut rng);
        base = base_observed::<T>(&mut rng, yo.clone(), yp);
    }
    let construct = if *wv == Worldview::Wysiwyg { yo } else { ranged(&mut rng) };
    let base = impose_worldview(&base, wv, Some(&construct), rng.gen())?;
    let holds = worldview_holds(&base, wv, &T::zero())?;
    ensure(holds.holds, &base, || format!("premise: {wv} does not hold"))?;

    let bound = max_accuracy_under_dem_parity(&base)?;
    let suboptimal = *wv == Worldview::Wysiwyg;
    ensure(!suboptimal || bound < T::one(), &base, || "WYSIWYG base with a zero observed gap".into())?;

    let input = either(&mut rng);
    let yc = base.support(Variable::Yc);
    let dist = apply_model(&base, &dp_kernel(&mut rng, &Prepared::new(&base), input, &yc)?)?;
    check_dp(&dist)?;
    check_no_amplification(&dist)?;
    let acc = construct_accuracy(&dist)?;
    ensure(le(&acc, &bound), &dist, || format!("accuracy {} exceeds bound {}", acc.render(), bound.render()))?;

    let optimal = optimal_dem_parity_model(&base)?.dist;
    check_dp(&optimal)?;
    check_no_amplification(&optimal)?;
    let acc = construct_accuracy(&optimal)?;
    ensure(eq(&acc, &bound), &optimal, || {
        format!("optimal accuracy {} differs from bound {}", acc.render(), bound.render())
    })?;
    if !suboptimal {
        ensure(eq(&acc, &T::one()), &optimal, || "under WAE the optimal model should be exact".into())?;
    }
    Ok(())
}

/// Runs every cell once with `seed`; used to replay a reported counterexample.
pub(super) fn whole_table<T: Scalar>(seed: u64) -> Outcome {
    for cell in CELLS {
        cell.trial::<T>(seed).map_err(|f| Failure { message: format!("{}: {}", label(cell), f.message), ..f })?;
    }
    Ok(())
}

fn label(cell: Cell) -> String {
    format!("{} / {}", cell.test(), cell.worldview())
}

/// All cells, `trials` trials each; the first counterexample names its cell.
pub(super) fn run_cells<T: Scalar>(stream: u64, trials: usize) -> (Vec<TableCell>, Option<Counterexample>) {
    let mut first = None;
    let cells = CELLS
        .iter()
        .enumerate()
        .map(|(i, &cell)| {
            let (failures, cx) = summarize(sweep(derive_seed(stream, i as u64), trials, |s| cell.trial::<T>(s)));
            if first.is_none() {
                first = cx.map(|c| Counterexample { message: format!("{}: {}", label(cell), c.message), ..c });
            }
            TableCell {
                test: cell.test().into(),
                worldview: cell.worldview().to_string(),
                outcome: cell.outcome().into(),
                property: cell.property().into(),
                trials,
                failures,
            }
        })
        .collect();
    (cells, first)
}
