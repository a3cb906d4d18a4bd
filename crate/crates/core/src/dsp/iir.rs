use super::design::Biquad;

/// Transposed direct-form II state for a cascade of sections.
#[derive(Debug, Clone)]
pub struct Cascade {
    sections: Vec<Biquad>,
    state: Vec<[f64; 2]>,
}

impl Cascade {
    pub fn new(sections: Vec<Biquad>) -> Self {
        let state = vec![[0.0; 2]; sections.len()];
        Self { sections, state }
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    #[inline]
    pub fn process(&mut self, mut x: f64) -> f64 {
        for (s, z) in self.sections.iter().zip(self.state.iter_mut()) {
            let y = s.b[0] * x + z[0];
            z[0] = s.b[1] * x - s.a[1] * y + z[1];
            z[1] = s.b[2] * x - s.a[2] * y;
            x = y;
        }
        x
    }

    pub fn process_slice(&mut self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.process(x)).collect()
    }

    pub fn reset(&mut self) {
        self.state.iter_mut().for_each(|z| *z = [0.0; 2]);
    }

    /// Sum of squares of the first `len` impulse-response samples.
    pub fn impulse_energy(&self, len: usize) -> f64 {
        let mut probe = Cascade::new(self.sections.clone());
        (0..len)
            .map(|n| {
                let y = probe.process(if n == 0 { 1.0 } else { 0.0 });
                y * y
            })
            .sum()
    }
}
