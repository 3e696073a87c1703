//! Stream elements and per-port stream bindings.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

/// One 32-bit word moving through the pipeline each cycle, with the
/// valid/sop/eop protocol flags. `sop`/`eop` are only meaningful while
/// `valid` is set. EQU arithmetic interprets the word as an IEEE-754
/// single; everything else treats it as raw bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StreamElement {
    pub word: u32,
    pub valid: bool,
    pub sop: bool,
    pub eop: bool,
}

impl StreamElement {
    pub const BUBBLE: StreamElement = StreamElement {
        word: 0,
        valid: false,
        sop: false,
        eop: false,
    };

    pub fn data(word: u32) -> Self {
        StreamElement {
            word,
            valid: true,
            sop: false,
            eop: false,
        }
    }

    pub fn f32(&self) -> f32 {
        f32::from_bits(self.word)
    }

    pub fn from_f32(v: f32) -> Self {
        Self::data(v.to_bits())
    }
}

/// How one input port of the top module is fed during a pass.
#[derive(Debug, Clone, PartialEq)]
pub enum PortBinding {
    /// Explicit per-element words, length `T`.
    Data(Vec<u32>),
    /// Word 1 on the first element of a pass, 0 elsewhere.
    SopFlag,
    /// Word 1 on the last element of a pass, 0 elsewhere.
    EopFlag,
    /// Constant word, also used for `Append_Reg` registers.
    Const(u32),
}

/// Per-port input bindings plus captured outputs for one simulation.
/// All data bindings share the same element count `T`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StreamSet {
    pub t: usize,
    pub inputs: BTreeMap<String, PortBinding>,
    pub outputs: BTreeMap<String, Vec<StreamElement>>,
}

impl StreamSet {
    pub fn new(t: usize) -> Self {
        StreamSet {
            t,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn bind(&mut self, port: impl Into<String>, binding: PortBinding) {
        self.inputs.insert(port.into(), binding);
    }

    pub fn bind_f32(&mut self, port: impl Into<String>, values: &[f32]) {
        self.bind(
            port,
            PortBinding::Data(values.iter().map(|v| v.to_bits()).collect()),
        );
    }

    /// Words a data port supplies at logical position `t` (elements beyond
    /// the binding length read as zero).
    pub fn word_at(&self, binding: &PortBinding, t: usize) -> u32 {
        match binding {
            PortBinding::Data(words) => words.get(t).copied().unwrap_or(0),
            PortBinding::SopFlag => u32::from(t == 0),
            PortBinding::EopFlag => u32::from(t + 1 == self.t),
            PortBinding::Const(w) => *w,
        }
    }

    /// Number of ports that cost memory bandwidth (explicit data streams).
    pub fn data_port_count(&self) -> usize {
        self.inputs
            .values()
            .filter(|b| matches!(b, PortBinding::Data(_)))
            .count()
    }
}
