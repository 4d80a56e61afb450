/// A scalar field sampled on a rectangular grid of cell centres.
///
/// Implemented by analytic/oracle surfaces and by Monte Carlo histograms so the
/// analysis routines can treat both alike.
pub trait Grid<T> {
    fn centres1(&self) -> &[T];
    fn centres2(&self) -> &[T];
    fn value(&self, i: usize, j: usize) -> T;

    fn shape(&self) -> (usize, usize) {
        (self.centres1().len(), self.centres2().len())
    }
}
