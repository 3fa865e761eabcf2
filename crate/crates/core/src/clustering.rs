//! Two-class K-medoids under the L1 distance.
//!
//! Each point is charged the distance to the medoid of its own class. The
//! alternating scheme (assign to nearest medoid, then re-pick each medoid as
//! the in-class point with the smallest summed distance) is fully
//! deterministic: assignment ties go to [`Class::First`], medoid ties go to the
//! lowest point index.

use crate::error::{Error, Result};

pub type Point = [f64; 3];

/// Upper bound on assign/update sweeps.
pub const MAX_SWEEPS: usize = 100;

/// Largest set accepted by [`brute_force_two`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Relative gap under which two distances or distance sums count as tied.
/// Ties are structural (a two-point class, a point halfway between medoids)
/// and must not be decided by rounding.
const TIE_TOLERANCE: f64 = 1e-12;

#[inline]
fn within_tie(a: f64, b: f64) -> bool {
    a <= b + TIE_TOLERANCE * a.abs().max(b.abs())
}

/// Sum of absolute per-channel differences.
#[inline]
pub fn l1_distance(a: &Point, b: &Point) -> f64 {
    (a[0] - b[0]).abs() + (a[1] - b[1]).abs() + (a[2] - b[2]).abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Class {
    First,
    Second,
}

impl Class {
    pub fn flipped(self) -> Self {
        match self {
            Class::First => Class::Second,
            Class::Second => Class::First,
        }
    }

    fn index(self) -> usize {
        match self {
            Class::First => 0,
            Class::Second => 1,
        }
    }
}

/// Points to be clustered; at least two.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelSet {
    points: Vec<Point>,
}

impl PixelSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DegenerateInput(points.len()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    labels: Vec<Class>,
    medoids: [usize; 2],
    total_cost: f64,
    sweeps: usize,
}

impl Assignment {
    pub fn labels(&self) -> &[Class] {
        &self.labels
    }

    /// Point indices of the first and second medoid.
    pub fn medoids(&self) -> [usize; 2] {
        self.medoids
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    /// Sweeps performed by [`kmedoids_two`]; zero for brute force.
    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn class_sizes(&self) -> [usize; 2] {
        let second = self.labels.iter().filter(|&&c| c == Class::Second).count();
        [self.labels.len() - second, second]
    }

    /// Same partition with the two class names exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            labels: self.labels.iter().map(|c| c.flipped()).collect(),
            medoids: [self.medoids[1], self.medoids[0]],
            total_cost: self.total_cost,
            sweeps: self.sweeps,
        }
    }
}

/// Number of positions where the two label vectors disagree.
pub fn mismatches(a: &[Class], b: &[Class]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Runs two-class K-medoids from the given initial medoids.
pub fn kmedoids_two(points: &PixelSet, init: (usize, usize)) -> Result<Assignment> {
    kmedoids_two_traced(points, init).map(|(a, _)| a)
}

/// [`kmedoids_two`] plus the total cost after every assignment step.
pub fn kmedoids_two_traced(points: &PixelSet, init: (usize, usize)) -> Result<(Assignment, Vec<f64>)> {
    let pts = points.points();
    let n = pts.len();
    if n < 2 {
        return Err(Error::DegenerateInput(n));
    }
    if init.0 >= n || init.1 >= n || init.0 == init.1 {
        return Err(Error::InvalidInit(init.0, init.1, n));
    }

    let all_identical = pts.iter().all(|p| p == &pts[0]);
    let mut medoids = [init.0, init.1];
    let mut previous: Option<Vec<Class>> = None;
    let mut trace = Vec::new();
    let mut scratch = MedoidScratch::default();

    for sweep in 1..=MAX_SWEEPS {
        let (mut labels, mut cost) = assign(pts, medoids);
        // Coincident medoids on a non-constant set would leave the second
        // class empty forever: move it to the farthest point instead.
        if !all_identical && !labels.contains(&Class::Second) {
            medoids[1] = farthest_from(pts, medoids[0]);
            (labels, cost) = assign(pts, medoids);
        }
        trace.push(cost);

        let converged = previous.as_ref() == Some(&labels);
        if converged || sweep == MAX_SWEEPS {
            return Ok((
                Assignment {
                    labels,
                    medoids,
                    total_cost: cost,
                    sweeps: sweep,
                },
                trace,
            ));
        }

        for class in [Class::First, Class::Second] {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
            if !members.is_empty() {
                medoids[class.index()] = scratch.best_medoid(pts, &members);
            }
        }
        previous = Some(labels);
    }
    unreachable!("loop returns on its final sweep")
}

fn assign(pts: &[Point], medoids: [usize; 2]) -> (Vec<Class>, f64) {
    let (m0, m1) = (pts[medoids[0]], pts[medoids[1]]);
    let mut cost = 0.0;
    let labels = pts
        .iter()
        .map(|p| {
            let d0 = l1_distance(p, &m0);
            let d1 = l1_distance(p, &m1);
            if within_tie(d0, d1) {
                cost += d0;
                Class::First
            } else {
                cost += d1;
                Class::Second
            }
        })
        .collect();
    (labels, cost)
}

fn farthest_from(pts: &[Point], from: usize) -> usize {
    let anchor = pts[from];
    let mut best = from;
    let mut best_d = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let d = l1_distance(p, &anchor);
        if d > best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Reused buffers for the medoid update.
///
/// The L1 distance separates per channel, so the summed distance from a
/// candidate to all members is a sum of three one-dimensional absolute
/// deviations. Each is evaluated from sorted values and prefix sums, making
/// the update `O(n log n)` instead of `O(n^2)`.
#[derive(Default)]
struct MedoidScratch {
    sorted: [Vec<f64>; 3],
    prefix: [Vec<f64>; 3],
    totals: Vec<f64>,
}

impl MedoidScratch {
    fn best_medoid(&mut self, pts: &[Point], members: &[usize]) -> usize {
        let m = members.len();
        self.totals.clear();
        self.totals.resize(m, 0.0);
        for ch in 0..3 {
            let sorted = &mut self.sorted[ch];
            sorted.clear();
            sorted.extend(members.iter().map(|&i| pts[i][ch]));
            sorted.sort_by(f64::total_cmp);
            let prefix = &mut self.prefix[ch];
            prefix.clear();
            prefix.push(0.0);
            let mut acc = 0.0;
            for &v in sorted.iter() {
                acc += v;
                prefix.push(acc);
            }
            let total = acc;
            for (slot, &i) in self.totals.iter_mut().zip(members) {
                let x = pts[i][ch];
                let below = sorted.partition_point(|&v| v < x);
                let upto = sorted.partition_point(|&v| v <= x);
                let above = m - upto;
                let lower = x * below as f64 - prefix[below];
                let upper = (total - prefix[upto]) - x * above as f64;
                *slot += lower + upper;
            }
        }
        let min = self.totals.iter().copied().fold(f64::INFINITY, f64::min);
        let best = self
            .totals
            .iter()
            .position(|&t| within_tie(t, min))
            .expect("non-empty class");
        members[best]
    }
}

/// Exhaustive optimum over every medoid pair; the reference the iterative
/// method is checked against.
pub fn brute_force_two(points: &PixelSet) -> Result<Assignment> {
    let pts = points.points();
    let n = pts.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            max: BRUTE_FORCE_LIMIT,
            got: n,
        });
    }
    let mut best: Option<Assignment> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut cost = 0.0;
            let labels = pts
                .iter()
                .map(|p| {
                    let di = l1_distance(p, &pts[i]);
                    let dj = l1_distance(p, &pts[j]);
                    cost += di.min(dj);
                    if di <= dj {
                        Class::First
                    } else {
                        Class::Second
                    }
                })
                .collect();
            if best.as_ref().is_none_or(|b| cost < b.total_cost) {
                best = Some(Assignment {
                    labels,
                    medoids: [i, j],
                    total_cost: cost,
                    sweeps: 0,
                });
            }
        }
    }
    best.ok_or(Error::DegenerateInput(n))
}

/// Returns `candidate`, possibly with its classes exchanged, in whichever
/// orientation disagrees with `reference` on fewer points. Ties keep the
/// original orientation.
pub fn align_labels(reference: &Assignment, candidate: &Assignment) -> Result<Assignment> {
    let (r, c) = (reference.labels.len(), candidate.labels.len());
    if r != c {
        return Err(Error::LengthMismatch(r, c));
    }
    let direct = mismatches(&reference.labels, &candidate.labels);
    if r - direct < direct {
        Ok(candidate.swapped())
    } else {
        Ok(candidate.clone())
    }
}
