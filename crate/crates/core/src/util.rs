//! Small enumeration helpers shared by the exhaustive suites and tests.

/// All n-tuples over `values`, odometer order (index 0 varies fastest).
pub(crate) fn cartesian_power<T: Clone>(values: &[T], n: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    if values.is_empty() {
        return out;
    }
    let mut idx = vec![0usize; n];
    loop {
        out.push(idx.iter().map(|&i| values[i].clone()).collect());
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            idx[k] += 1;
            if idx[k] < values.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
