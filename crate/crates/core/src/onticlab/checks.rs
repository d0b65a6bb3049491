use serde::Serialize;

use super::{CheckReport, OnticExtension, Witness};
use crate::scalar::Field;

/// Running maximum of absolute violations with the first cell attaining it.
struct Tracker<'a, P> {
    ext: &'a OnticExtension<P>,
    eps: f64,
    worst: P,
    witness: Option<Witness>,
    skipped: usize,
}

impl<'a, P: Field> Tracker<'a, P> {
    fn new(ext: &'a OnticExtension<P>, eps: f64) -> Self {
        Self {
            ext,
            eps,
            worst: P::zero(),
            witness: None,
            skipped: 0,
        }
    }

    /// `true` if `p` is a usable conditioning probability; counts a skip otherwise.
    fn conditionable(&mut self, p: &P) -> bool {
        let ok = p.above(self.eps);
        if !ok {
            self.skipped += 1;
        }
        ok
    }

    fn offer(&mut self, lhs: P, rhs: P, [x, a, y, b, l]: [Option<usize>; 5]) {
        let v = (lhs - rhs).abs_val();
        if v > self.worst {
            let s = self.ext.scenario();
            self.witness = Some(Witness {
                x: x.map(|i| s.x.label(i).to_string()),
                a: a.map(|i| s.a.label(i).to_string()),
                y: y.map(|i| s.y.label(i).to_string()),
                b: b.map(|i| s.b.label(i).to_string()),
                lambda: l.map(|i| self.ext.lambda().label(i).to_string()),
            });
            self.worst = v;
        }
    }

    fn finish(self, condition: &str) -> CheckReport {
        CheckReport {
            condition: condition.to_string(),
            holds: self.worst.within(self.eps),
            worst_violation: self.worst.as_f64(),
            exact_violation: P::EXACT.then(|| self.worst.to_string()),
            witness: self.witness,
            skipped: self.skipped,
        }
    }

    fn merge(mut self, other: Tracker<'a, P>) -> Self {
        if other.worst > self.worst {
            self.worst = other.worst;
            self.witness = other.witness;
        }
        self.skipped += other.skipped;
        self
    }
}

fn sum<P: Field>(n: usize, f: impl Fn(usize) -> P) -> P {
    (0..n).fold(P::zero(), |s, i| s + f(i))
}

fn ratio_or_zero<P: Field>(num: P, den: P) -> P {
    if den.is_zero() {
        P::zero()
    } else {
        num / den
    }
}

/// `p(a|x,y) = p(a|x)` and `p(lambda|a,x,y) = p(lambda|a,x)`.
pub fn check_no_retrocausality<P: Field>(ext: &OnticExtension<P>, eps: f64) -> CheckReport {
    let (nx, na, ny, _) = ext.scenario().sizes();
    let nl = ext.lambda().len();
    let mut t = Tracker::new(ext, eps);
    let ny_f = P::from_count(ny);
    for x in 0..nx {
        for a in 0..na {
            let p_ax = sum(ny, |y| ext.p_a(x, a, y));
            let mean = p_ax.clone() / ny_f.clone();
            for y in 0..ny {
                t.offer(ext.p_a(x, a, y), mean.clone(), [Some(x), Some(a), Some(y), None, None]);
            }
            for y in 0..ny {
                let cond = ext.p_a(x, a, y);
                if !t.conditionable(&cond) {
                    continue;
                }
                for l in 0..nl {
                    let lhs = ext.p_al(x, a, y, l) / cond.clone();
                    let rhs = ratio_or_zero(sum(ny, |yy| ext.p_al(x, a, yy, l)), p_ax.clone());
                    t.offer(lhs, rhs, [Some(x), Some(a), Some(y), None, Some(l)]);
                }
            }
        }
    }
    t.finish("no retrocausality")
}

/// The two forms of lambda-mediation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MediationReports {
    /// `p(b|a,lambda,x,y) = p(b|lambda,y)`
    pub strong: CheckReport,
    /// `p(b|a,lambda,x,y) = p(b|lambda,x,y)`
    pub weak: CheckReport,
}

pub fn check_lambda_mediation<P: Field>(ext: &OnticExtension<P>, eps: f64) -> MediationReports {
    let (nx, na, ny, nb) = ext.scenario().sizes();
    let nl = ext.lambda().len();
    let mut strong = Tracker::new(ext, eps);
    let mut weak = Tracker::new(ext, eps);
    for x in 0..nx {
        for a in 0..na {
            for y in 0..ny {
                for l in 0..nl {
                    let cond = ext.p_al(x, a, y, l);
                    let usable = strong.conditionable(&cond);
                    weak.conditionable(&cond);
                    if !usable {
                        continue;
                    }
                    let p_lxy = ext.p_l(x, y, l);
                    let p_ly = sum(nx, |xx| ext.p_l(xx, y, l));
                    for b in 0..nb {
                        let lhs = ext.get(x, a, y, b, l).clone() / cond.clone();
                        let by_y = ratio_or_zero(sum(nx, |xx| ext.p_bl(xx, y, b, l)), p_ly.clone());
                        let by_xy = ext.p_bl(x, y, b, l) / p_lxy.clone();
                        strong.offer(lhs.clone(), by_y, [Some(x), Some(a), Some(y), Some(b), Some(l)]);
                        weak.offer(lhs, by_xy, [Some(x), Some(a), Some(y), Some(b), Some(l)]);
                    }
                }
            }
        }
    }
    MediationReports {
        strong: strong.finish("lambda mediation"),
        weak: weak.finish("lambda mediation (with preparation input)"),
    }
}

/// `p(a, b, lambda | x, y) = p(a|x,lambda) p(b|y,lambda) p(lambda)` on every cell.
pub fn check_local_causality<P: Field>(ext: &OnticExtension<P>, eps: f64) -> CheckReport {
    let (nx, na, ny, nb) = ext.scenario().sizes();
    let nl = ext.lambda().len();
    let mut t = Tracker::new(ext, eps);
    let cells = P::from_count(nx * ny);
    for l in 0..nl {
        let prior = sum(nx, |x| sum(ny, |y| ext.p_l(x, y, l))) / cells.clone();
        for x in 0..nx {
            let den_a = sum(ny, |y| ext.p_l(x, y, l));
            for a in 0..na {
                let left = ratio_or_zero(sum(ny, |y| ext.p_al(x, a, y, l)), den_a.clone());
                for y in 0..ny {
                    let den_b = sum(nx, |xx| ext.p_l(xx, y, l));
                    for b in 0..nb {
                        let right = ratio_or_zero(sum(nx, |xx| ext.p_bl(xx, y, b, l)), den_b.clone());
                        let model = prior.clone() * left.clone() * right;
                        t.offer(
                            ext.get(x, a, y, b, l).clone(),
                            model,
                            [Some(x), Some(a), Some(y), Some(b), Some(l)],
                        );
                    }
                }
            }
        }
    }
    t.finish("local causality")
}

/// Measurement, parameter and outcome independence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceReports {
    /// `p(lambda|x,y) = p(lambda)`
    pub measurement: CheckReport,
    /// `p(b|lambda,x,y) = p(b|lambda,y)` and `p(a|lambda,x,y) = p(a|lambda,x)`
    pub parameter: CheckReport,
    /// `p(b|a,lambda,x,y) = p(b|lambda,x,y)`
    pub outcome: CheckReport,
}

impl IndependenceReports {
    pub fn all_hold(&self) -> bool {
        self.measurement.holds && self.parameter.holds && self.outcome.holds
    }
}

pub fn check_independences<P: Field>(ext: &OnticExtension<P>, eps: f64) -> IndependenceReports {
    let (nx, na, ny, nb) = ext.scenario().sizes();
    let nl = ext.lambda().len();
    let cells = P::from_count(nx * ny);

    let mut mi = Tracker::new(ext, eps);
    for l in 0..nl {
        let prior = sum(nx, |x| sum(ny, |y| ext.p_l(x, y, l))) / cells.clone();
        for x in 0..nx {
            for y in 0..ny {
                mi.offer(ext.p_l(x, y, l), prior.clone(), [Some(x), None, Some(y), None, Some(l)]);
            }
        }
    }

    let mut pi_b = Tracker::new(ext, eps);
    let mut pi_a = Tracker::new(ext, eps);
    for x in 0..nx {
        for y in 0..ny {
            for l in 0..nl {
                let cond = ext.p_l(x, y, l);
                if !pi_b.conditionable(&cond) {
                    continue;
                }
                let den_y = sum(nx, |xx| ext.p_l(xx, y, l));
                for b in 0..nb {
                    let lhs = ext.p_bl(x, y, b, l) / cond.clone();
                    let rhs = sum(nx, |xx| ext.p_bl(xx, y, b, l)) / den_y.clone();
                    pi_b.offer(lhs, rhs, [Some(x), None, Some(y), Some(b), Some(l)]);
                }
                let den_x = sum(ny, |yy| ext.p_l(x, yy, l));
                for a in 0..na {
                    let lhs = ext.p_al(x, a, y, l) / cond.clone();
                    let rhs = sum(ny, |yy| ext.p_al(x, a, yy, l)) / den_x.clone();
                    pi_a.offer(lhs, rhs, [Some(x), Some(a), Some(y), None, Some(l)]);
                }
            }
        }
    }

    let mut oi = Tracker::new(ext, eps);
    for x in 0..nx {
        for a in 0..na {
            for y in 0..ny {
                for l in 0..nl {
                    let cond = ext.p_al(x, a, y, l);
                    if !oi.conditionable(&cond) {
                        continue;
                    }
                    let p_lxy = ext.p_l(x, y, l);
                    for b in 0..nb {
                        let lhs = ext.get(x, a, y, b, l).clone() / cond.clone();
                        let rhs = ext.p_bl(x, y, b, l) / p_lxy.clone();
                        oi.offer(lhs, rhs, [Some(x), Some(a), Some(y), Some(b), Some(l)]);
                    }
                }
            }
        }
    }

    IndependenceReports {
        measurement: mi.finish("measurement independence"),
        parameter: pi_b.merge(pi_a).finish("parameter independence"),
        outcome: oi.finish("outcome independence"),
    }
}
