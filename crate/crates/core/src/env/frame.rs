//! Three-frame observation stacking.

/// Rolling stack of the three most recent frames for one agent. Flattened
/// oldest → newest; at reset all three slots hold the initial view.
#[derive(Debug, Clone)]
pub struct FrameStack {
    frames: [Vec<f64>; 3],
}

impl FrameStack {
    pub fn filled_with(initial: Vec<f64>) -> Self {
        Self {
            frames: [initial.clone(), initial.clone(), initial],
        }
    }

    pub fn push(&mut self, frame: Vec<f64>) {
        self.frames.swap(0, 1);
        self.frames.swap(1, 2);
        self.frames[2] = frame;
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.frames[0].len() * 3);
        for f in &self.frames {
            out.extend_from_slice(f);
        }
        out
    }

    pub fn newest(&self) -> &[f64] {
        &self.frames[2]
    }
}
