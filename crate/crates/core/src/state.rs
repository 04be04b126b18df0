use serde::Serialize;

/// Converter configuration. `On` corresponds to `y = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    Off,
    On,
}

impl Mode {
    pub fn y(self) -> u8 {
        match self {
            Mode::Off => 0,
            Mode::On => 1,
        }
    }

    pub fn from_y(y: u8) -> Option<Mode> {
        match y {
            0 => Some(Mode::Off),
            1 => Some(Mode::On),
            _ => None,
        }
    }
}

/// A point `(x, y)` of the hybrid state space `R x {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HybridState {
    pub x: f64,
    pub mode: Mode,
}

impl HybridState {
    pub fn new(x: f64, mode: Mode) -> Self {
        Self { x, mode }
    }

    pub fn on(x: f64) -> Self {
        Self::new(x, Mode::On)
    }

    pub fn off(x: f64) -> Self {
        Self::new(x, Mode::Off)
    }

    pub fn y(&self) -> u8 {
        self.mode.y()
    }
}
