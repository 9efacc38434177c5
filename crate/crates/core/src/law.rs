/// A univariate continuous law on the non-negative half line.
pub trait ContinuousLaw {
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    /// Survival function. Implementors with a more accurate upper tail
    /// should override this.
    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }
}

impl<L: ContinuousLaw + ?Sized> ContinuousLaw for &L {
    fn pdf(&self, x: f64) -> f64 {
        (**self).pdf(x)
    }
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        (**self).sf(x)
    }
}
