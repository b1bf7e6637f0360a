//! Globally adaptive Gauss–Kronrod (7/15) quadrature, with a nested
//! variant for iterated integrals over boxes.

use std::cell::RefCell;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights at XGK[1], XGK[3], XGK[5] and the centre
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Subinterval limit of one adaptive run.
pub const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("quadrature did not reach tolerance {requested:e}: estimate {value} with error {error:e}")]
pub struct QuadratureFailure {
    pub value: f64,
    pub error: f64,
    pub requested: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for (i, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let pair = f(centre - half * x) + f(centre + half * x);
        k += w * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    (k * half, ((k - g) * half).abs())
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// `∫_a^b f` to `max(abs_tol, rel_tol |value|)`, bisecting the interval with
/// the largest error estimate first.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Estimate, QuadratureFailure> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error) = kronrod(&mut f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Interval { a, b, value, error });
    let (mut total, mut total_error) = (value, error);
    loop {
        let requested = abs_tol.max(rel_tol * total.abs());
        if total_error <= requested {
            break;
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if heap.len() + 1 >= MAX_INTERVALS || !total_error.is_finite() || mid <= worst.a || mid >= worst.b {
            return Err(QuadratureFailure {
                value: total,
                error: total_error,
                requested,
            });
        }
        let (lv, le) = kronrod(&mut f, worst.a, mid);
        let (rv, re) = kronrod(&mut f, mid, worst.b);
        evaluations += 30;
        total += lv + rv - worst.value;
        total_error += le + re - worst.error;
        heap.push(Interval { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Interval { a: mid, b: worst.b, value: rv, error: re });
    }
    // re-add from scratch to shed accumulated update roundoff
    let mut intervals = heap.into_vec();
    intervals.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(Estimate {
        value: crate::sum::compensated(intervals.iter().map(|i| i.value)),
        error: intervals.iter().map(|i| i.error).sum(),
        evaluations,
    })
}

/// Iterated integral of `f` over the box `lo..hi`. `order` lists the
/// coordinates from outermost to innermost integration. The absolute
/// tolerance is split so that every inner integral carries its share.
pub fn integrate_nested<F: Fn(&[f64]) -> f64>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    order: &[usize],
    abs_tol: f64,
) -> Result<Estimate, QuadratureFailure> {
    let point = RefCell::new(lo.to_vec());
    let failure = RefCell::new(None);
    let evaluations = RefCell::new(0usize);
    let value = nested_level(f, lo, hi, order, abs_tol, &point, &failure, &evaluations)?;
    match failure.into_inner() {
        Some(fail) => Err(fail),
        None => Ok(Estimate {
            value: value.value,
            error: value.error,
            evaluations: evaluations.into_inner(),
        }),
    }
}

#[allow(clippy::too_many_arguments)]
fn nested_level<F: Fn(&[f64]) -> f64>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    order: &[usize],
    abs_tol: f64,
    point: &RefCell<Vec<f64>>,
    failure: &RefCell<Option<QuadratureFailure>>,
    evaluations: &RefCell<usize>,
) -> Result<Estimate, QuadratureFailure> {
    let axis = order[0];
    let width = hi[axis] - lo[axis];
    if order.len() == 1 {
        let est = integrate(
            |x| {
                let mut p = point.borrow_mut();
                p[axis] = x;
                f(&p)
            },
            lo[axis],
            hi[axis],
            abs_tol,
            0.0,
        )?;
        *evaluations.borrow_mut() += est.evaluations;
        return Ok(est);
    }
    let inner_tol = 0.1 * abs_tol / width.max(f64::MIN_POSITIVE);
    integrate(
        |x| {
            point.borrow_mut()[axis] = x;
            match nested_level(f, lo, hi, &order[1..], inner_tol, point, failure, evaluations) {
                Ok(est) => est.value,
                Err(fail) => {
                    failure.borrow_mut().get_or_insert(fail);
                    0.0
                }
            }
        },
        lo[axis],
        hi[axis],
        0.5 * abs_tol,
        0.0,
    )
}
