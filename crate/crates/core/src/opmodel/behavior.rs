//! Conditional distributions `p(a, b | x, y)` over finite alphabets.

use std::io::{Read, Write};

use num_rational::BigRational;

use super::Alphabet;
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Field};

/// The four alphabets of a prepare-measure scenario.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub x: Alphabet,
    pub a: Alphabet,
    pub y: Alphabet,
    pub b: Alphabet,
}

impl Scenario {
    pub fn new(x: Alphabet, a: Alphabet, y: Alphabet, b: Alphabet) -> Self {
        Self { x, a, y, b }
    }

    pub fn binary() -> Self {
        Self::new(
            Alphabet::binary(),
            Alphabet::binary(),
            Alphabet::binary(),
            Alphabet::binary(),
        )
    }

    /// Preparation and measurement roles exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.y.clone(), self.b.clone(), self.x.clone(), self.a.clone())
    }

    pub fn sizes(&self) -> (usize, usize, usize, usize) {
        (self.x.len(), self.a.len(), self.y.len(), self.b.len())
    }

    pub fn cells(&self) -> usize {
        self.x.len() * self.a.len() * self.y.len() * self.b.len()
    }

    pub fn index(&self, x: usize, a: usize, y: usize, b: usize) -> usize {
        ((x * self.a.len() + a) * self.y.len() + y) * self.b.len() + b
    }

    pub fn is_binary(&self) -> bool {
        let (nx, na, ny, nb) = self.sizes();
        nx == 2 && na == 2 && ny == 2 && nb == 2
    }

    /// Every `(x, a, y, b)` index tuple in storage order.
    pub fn tuples(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        let (nx, na, ny, nb) = self.sizes();
        (0..nx)
            .flat_map(move |x| (0..na).flat_map(move |a| (0..ny).flat_map(move |y| (0..nb).map(move |b| (x, a, y, b)))))
    }
}

/// Behavior table `p(a, b | x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BehaviorTable<P> {
    scenario: Scenario,
    probs: Vec<P>,
}

impl<P: Field> BehaviorTable<P> {
    /// Validates that entries lie in `[0, 1]` and each `(x, y)` block sums to one,
    /// within `eps` (exactly for exact fields).
    pub fn new(scenario: Scenario, probs: Vec<P>, eps: f64) -> Result<Self> {
        if probs.len() != scenario.cells() {
            return Err(Error::InvalidBehavior(format!(
                "{} entries for {} cells",
                probs.len(),
                scenario.cells()
            )));
        }
        let table = Self { scenario, probs };
        table.validate(eps)?;
        Ok(table)
    }

    pub fn from_fn(scenario: Scenario, eps: f64, mut f: impl FnMut(usize, usize, usize, usize) -> P) -> Result<Self> {
        let probs = scenario.tuples().map(|(x, a, y, b)| f(x, a, y, b)).collect();
        Self::new(scenario, probs, eps)
    }

    fn validate(&self, eps: f64) -> Result<()> {
        let one = P::one();
        for (k, p) in self.probs.iter().enumerate() {
            let below = -p.clone();
            let above = p.clone() - one.clone();
            if below.above(eps) || above.above(eps) {
                return Err(Error::InvalidBehavior(format!("entry {k} = {p} outside [0, 1]")));
            }
        }
        let (nx, _, ny, _) = self.scenario.sizes();
        for x in 0..nx {
            for y in 0..ny {
                let dev = self.block_sum(x, y) - one.clone();
                if !dev.within(eps) {
                    return Err(Error::InvalidBehavior(format!(
                        "block (x={}, y={}) sums to 1 + {dev}",
                        self.scenario.x.label(x),
                        self.scenario.y.label(y)
                    )));
                }
            }
        }
        Ok(())
    }

    fn block_sum(&self, x: usize, y: usize) -> P {
        let (_, na, _, nb) = self.scenario.sizes();
        let mut s = P::zero();
        for a in 0..na {
            for b in 0..nb {
                s = s + self.get(x, a, y, b).clone();
            }
        }
        s
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn probs(&self) -> &[P] {
        &self.probs
    }

    pub fn get(&self, x: usize, a: usize, y: usize, b: usize) -> &P {
        &self.probs[self.scenario.index(x, a, y, b)]
    }

    /// Lookup by labels.
    pub fn get_labeled(&self, x: &str, a: &str, y: &str, b: &str) -> Option<&P> {
        let s = &self.scenario;
        Some(self.get(s.x.index_of(x)?, s.a.index_of(a)?, s.y.index_of(y)?, s.b.index_of(b)?))
    }

    /// `p(a | x, y) = sum_b p(a, b | x, y)`.
    pub fn marginal_a(&self, x: usize, a: usize, y: usize) -> P {
        (0..self.scenario.b.len()).fold(P::zero(), |acc, b| acc + self.get(x, a, y, b).clone())
    }

    /// `p(b | x, y) = sum_a p(a, b | x, y)`.
    pub fn marginal_b(&self, x: usize, y: usize, b: usize) -> P {
        (0..self.scenario.a.len()).fold(P::zero(), |acc, a| acc + self.get(x, a, y, b).clone())
    }

    /// Largest change of `p(a | x, y)` across `y`.
    pub fn forward_signalling(&self) -> P {
        let (nx, na, ny, _) = self.scenario.sizes();
        let mut worst = P::zero();
        for x in 0..nx {
            for a in 0..na {
                let base = self.marginal_a(x, a, 0);
                for y in 1..ny {
                    worst = P::max_of(worst, (self.marginal_a(x, a, y) - base.clone()).abs_val());
                }
            }
        }
        worst
    }

    /// Largest change of `p(b | x, y)` across `x`.
    pub fn backward_signalling(&self) -> P {
        let (nx, _, ny, nb) = self.scenario.sizes();
        let mut worst = P::zero();
        for y in 0..ny {
            for b in 0..nb {
                let base = self.marginal_b(0, y, b);
                for x in 1..nx {
                    worst = P::max_of(worst, (self.marginal_b(x, y, b) - base.clone()).abs_val());
                }
            }
        }
        worst
    }

    /// Table with roles exchanged: `q(b, a | y, x) = p(a, b | x, y)`.
    pub fn swapped(&self) -> Self {
        let scenario = self.scenario.swapped();
        let probs = scenario
            .tuples()
            .map(|(y, b, x, a)| self.get(x, a, y, b).clone())
            .collect();
        Self { scenario, probs }
    }

    /// Max-norm distance between two tables over the same labels, matched by label.
    pub fn max_deviation(&self, other: &Self) -> Result<P> {
        let s = &self.scenario;
        let o = &other.scenario;
        for (mine, theirs, name) in [
            (&s.x, &o.x, "x"),
            (&s.a, &o.a, "a"),
            (&s.y, &o.y, "y"),
            (&s.b, &o.b, "b"),
        ] {
            if mine.len() != theirs.len() || mine.labels().iter().any(|l| theirs.index_of(l).is_none()) {
                return Err(Error::AlphabetMismatch(format!("{name}: {mine} vs {theirs}")));
            }
        }
        let mut worst = P::zero();
        for (x, a, y, b) in s.tuples() {
            let q = other
                .get_labeled(s.x.label(x), s.a.label(a), s.y.label(y), s.b.label(b))
                .expect("labels checked");
            worst = P::max_of(worst, (self.get(x, a, y, b).clone() - q.clone()).abs_val());
        }
        Ok(worst)
    }

    pub fn map<Q: Field>(&self, f: impl Fn(&P) -> Q) -> BehaviorTable<Q> {
        BehaviorTable {
            scenario: self.scenario.clone(),
            probs: self.probs.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> BehaviorTable<f64> {
        self.map(|p| p.as_f64())
    }

    /// CSV with header `x,a,y,b,p`, rows in storage order.
    pub fn write_csv<W: Write>(&self, w: W, render: impl Fn(&P) -> String) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "a", "y", "b", "p"])?;
        let s = &self.scenario;
        for (x, a, y, b) in s.tuples() {
            out.write_record([
                s.x.label(x),
                s.a.label(a),
                s.y.label(y),
                s.b.label(b),
                &render(self.get(x, a, y, b)),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

impl BehaviorTable<f64> {
    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, |p| format!("{p:?}")).expect("in-memory write");
        String::from_utf8(buf).expect("utf8")
    }
}

impl BehaviorTable<BigRational> {
    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, format_rational).expect("in-memory write");
        String::from_utf8(buf).expect("utf8")
    }
}

/// Rows of a behavior CSV before alphabet reconstruction.
#[derive(Clone, Debug)]
pub struct BehaviorCsv {
    rows: Vec<[String; 5]>,
}

impl BehaviorCsv {
    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(r);
        let header = reader.headers()?.clone();
        if header.iter().map(str::trim).collect::<Vec<_>>() != ["x", "a", "y", "b", "p"] {
            return Err(Error::Document(format!(
                "behavior CSV header must be x,a,y,b,p, got {header:?}"
            )));
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            if rec.len() != 5 {
                return Err(Error::Document(format!("row with {} fields", rec.len())));
            }
            rows.push([0, 1, 2, 3, 4].map(|i| rec[i].trim().to_string()));
        }
        if rows.is_empty() {
            return Err(Error::Document("behavior CSV has no rows".into()));
        }
        Ok(Self { rows })
    }

    /// `true` when every probability is an integer or a fraction `n/d`.
    pub fn is_exact(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r[4].contains('/') || r[4].chars().all(|c| c.is_ascii_digit()))
    }

    fn scenario(&self) -> Result<Scenario> {
        let mut labels: [Vec<String>; 4] = Default::default();
        for row in &self.rows {
            for (k, l) in labels.iter_mut().enumerate() {
                if !l.contains(&row[k]) {
                    l.push(row[k].clone());
                }
            }
        }
        let [x, a, y, b] = labels.map(Alphabet::new);
        Ok(Scenario::new(x?, a?, y?, b?))
    }

    /// Build a table; missing cells are zero, duplicated cells are an error.
    pub fn into_table<P: Field>(self, eps: f64, parse: impl Fn(&str) -> Option<P>) -> Result<BehaviorTable<P>> {
        let scenario = self.scenario()?;
        let mut probs = vec![None; scenario.cells()];
        for row in &self.rows {
            let idx = scenario.index(
                scenario.x.require(&row[0])?,
                scenario.a.require(&row[1])?,
                scenario.y.require(&row[2])?,
                scenario.b.require(&row[3])?,
            );
            let p = parse(&row[4]).ok_or_else(|| Error::Document(format!("bad probability {:?}", row[4])))?;
            if probs[idx].replace(p).is_some() {
                return Err(Error::Document(format!("duplicate row {row:?}")));
            }
        }
        let probs = probs.into_iter().map(|p| p.unwrap_or_else(P::zero)).collect();
        BehaviorTable::new(scenario, probs, eps)
    }

    pub fn into_f64(self, eps: f64) -> Result<BehaviorTable<f64>> {
        self.into_table(eps, |s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
    }

    pub fn into_rational(self) -> Result<BehaviorTable<BigRational>> {
        self.into_table(0.0, parse_rational)
    }
}

/// CHSH score `(1/4) sum_{x,y} p(a xor b = x y | x, y)`.
pub fn chsh_value<P: Field>(t: &BehaviorTable<P>) -> Result<P> {
    if !t.scenario().is_binary() {
        return Err(Error::NonBinaryAlphabet);
    }
    let mut s = P::zero();
    for (x, a, y, b) in t.scenario().tuples() {
        if (a ^ b) == (x & y) {
            s = s + t.get(x, a, y, b).clone();
        }
    }
    Ok(s / P::from_count(4))
}

/// `sum_b p(a, b | x, y)` independent of `y` within `eps`.
pub fn check_forward_no_signalling<P: Field>(t: &BehaviorTable<P>, eps: f64) -> bool {
    t.forward_signalling().within(eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> BehaviorTable<f64> {
        BehaviorTable::from_fn(Scenario::binary(), 1e-12, |_, _, _, _| 0.25).unwrap()
    }

    #[test]
    fn chsh_of_simple_tables() {
        assert!((chsh_value(&uniform()).unwrap() - 0.5).abs() < 1e-15);
        // a = b = 0 always: satisfied for (x, y) != (1, 1) -> 3 of 4 clauses.
        let det = BehaviorTable::<BigRational>::from_fn(Scenario::binary(), 0.0, |_, a, _, b| {
            BigRational::ratio(i64::from(a == 0 && b == 0), 1)
        })
        .unwrap();
        assert_eq!(chsh_value(&det).unwrap(), BigRational::ratio(3, 4));
    }

    #[test]
    fn chsh_requires_binary() {
        let s = Scenario::new(
            Alphabet::range(3),
            Alphabet::binary(),
            Alphabet::binary(),
            Alphabet::binary(),
        );
        let t = BehaviorTable::from_fn(s, 1e-12, |_, _, _, _| 0.25).unwrap();
        assert!(matches!(chsh_value(&t), Err(Error::NonBinaryAlphabet)));
    }

    #[test]
    fn forward_signalling_detection() {
        assert!(check_forward_no_signalling(&uniform(), 1e-12));
        // a copies y
        let t = BehaviorTable::from_fn(Scenario::binary(), 1e-12, |_, a, y, _| if a == y { 0.5 } else { 0.0 }).unwrap();
        assert!(!check_forward_no_signalling(&t, 1e-9));
    }

    #[test]
    fn validation_rejects_bad_tables() {
        assert!(BehaviorTable::from_fn(Scenario::binary(), 1e-12, |_, _, _, _| 0.3).is_err());
        assert!(
            BehaviorTable::from_fn(Scenario::binary(), 1e-12, |_, a, _, b| match (a, b) {
                (0, 0) => -0.25,
                (1, 1) => 0.75,
                _ => 0.25,
            })
            .is_err()
        );
        assert!(BehaviorTable::new(Scenario::binary(), vec![0.25; 3], 1e-12).is_err());
    }

    #[test]
    fn swap_is_involutive() {
        let t = BehaviorTable::from_fn(Scenario::binary(), 1e-12, |x, a, y, b| {
            [0.1, 0.2, 0.3, 0.4][(a * 2 + b + x + 2 * y) % 4]
        })
        .unwrap();
        assert_eq!(t.swapped().swapped(), t);
        assert_eq!(t.swapped().get(1, 0, 0, 1), t.get(0, 1, 1, 0));
    }

    #[test]
    fn csv_round_trip_by_label() {
        let t = BehaviorTable::<BigRational>::from_fn(Scenario::binary(), 0.0, |x, a, y, b| {
            if x == y && a != b {
                BigRational::ratio(0, 1)
            } else if x == y {
                BigRational::ratio(1, 2)
            } else {
                BigRational::ratio(1, 4)
            }
        })
        .unwrap();
        let text = t.to_csv_string();
        assert!(text.starts_with("x,a,y,b,p\n0,0,0,0,1/2\n"));
        let csv = BehaviorCsv::read(text.as_bytes()).unwrap();
        assert!(csv.is_exact());
        assert_eq!(csv.into_rational().unwrap(), t);
        let f = BehaviorCsv::read(t.to_f64().to_csv_string().as_bytes()).unwrap();
        assert!(!f.is_exact());
        assert_eq!(f.into_f64(1e-12).unwrap(), t.to_f64());
    }

    #[test]
    fn csv_rejects_malformed() {
        assert!(BehaviorCsv::read("x,y,a,b,p\n0,0,0,0,1\n".as_bytes()).is_err());
        assert!(BehaviorCsv::read("x,a,y,b,p\n".as_bytes()).is_err());
        let dup = "x,a,y,b,p\n0,0,0,0,1\n0,0,0,0,1\n";
        assert!(BehaviorCsv::read(dup.as_bytes()).unwrap().into_f64(1e-9).is_err());
    }
}
