//! Register swap `E_AB` and local gates `V_B` on the full space.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::oracle::operator::{bitstring, check_cap, FullOperator, FullState};

/// Two equally long, disjoint registers of 1-based sites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProcessorLayout {
    a_sites: Vec<usize>,
    b_sites: Vec<usize>,
}

impl ProcessorLayout {
    pub fn new(a_sites: Vec<usize>, b_sites: Vec<usize>, n: usize) -> Result<Self> {
        check_cap(n)?;
        if a_sites.is_empty() || a_sites.len() != b_sites.len() {
            return Err(Error::InvalidLayout(format!(
                "registers need the same nonzero size (got {} and {})",
                a_sites.len(),
                b_sites.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for &s in a_sites.iter().chain(&b_sites) {
            if s == 0 || s > n {
                return Err(Error::SiteOutOfRange { site: s, n });
            }
            if !seen.insert(s) {
                return Err(Error::InvalidLayout(format!("site {s} appears twice")));
            }
        }
        Ok(Self { a_sites, b_sites })
    }

    pub fn a_sites(&self) -> &[usize] {
        &self.a_sites
    }

    pub fn b_sites(&self) -> &[usize] {
        &self.b_sites
    }

    pub fn k(&self) -> usize {
        self.a_sites.len()
    }

    /// Register content as a bitstring, first listed site first.
    pub fn register_bits(&self, index: usize, b: bool) -> String {
        let sites = if b { &self.b_sites } else { &self.a_sites };
        sites.iter().map(|&s| if index >> (s - 1) & 1 == 1 { '1' } else { '0' }).collect()
    }
}

fn swap_bits(x: usize, a: usize, b: usize) -> usize {
    let (ba, bb) = (x >> (a - 1) & 1, x >> (b - 1) & 1);
    if ba == bb {
        x
    } else {
        x ^ (1 << (a - 1)) ^ (1 << (b - 1))
    }
}

/// `E_AB`: exchanges the contents of the two registers, site by site.
pub fn permutation_e_ab(layout: &ProcessorLayout, n: usize) -> Result<FullOperator> {
    check_cap(n)?;
    if let Some(&s) = layout.a_sites.iter().chain(&layout.b_sites).find(|&&s| s > n) {
        return Err(Error::SiteOutOfRange { site: s, n });
    }
    FullOperator::from_permutation(n, |x| {
        layout.a_sites.iter().zip(&layout.b_sites).fold(x, |y, (&a, &b)| swap_bits(y, a, b))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LocalGate {
    Identity,
    /// `sx sx sx` on a three-site register.
    XxxFlip,
    /// `exp(-i pi sx sx / 4) = (I - i sx sx) / sqrt(2)` on a two-site register.
    RemoteExchange,
}

impl LocalGate {
    pub fn arity(&self) -> Option<usize> {
        match self {
            LocalGate::Identity => None,
            LocalGate::XxxFlip => Some(3),
            LocalGate::RemoteExchange => Some(2),
        }
    }
}

/// `V_B`: the gate acting on register B only.
pub fn local_gate_v_b(gate: LocalGate, layout: &ProcessorLayout, n: usize) -> Result<FullOperator> {
    check_cap(n)?;
    if let Some(k) = gate.arity() {
        if k != layout.b_sites.len() {
            return Err(Error::ArityMismatch { expected: k, got: layout.b_sites.len() });
        }
    }
    let flip_all: usize = layout.b_sites.iter().map(|&s| 1 << (s - 1)).sum();
    match gate {
        LocalGate::Identity => FullOperator::identity(n),
        LocalGate::XxxFlip => FullOperator::from_permutation(n, |x| x ^ flip_all),
        LocalGate::RemoteExchange => {
            let d = C64::new(FRAC_1_SQRT_2, 0.0);
            let o = C64::new(0.0, -FRAC_1_SQRT_2);
            FullOperator::from_triplets(n, (0..1usize << n).flat_map(|x| [(x, x, d), (x ^ flip_all, x, o)]))
        }
    }
}

/// `P_AB = V_B E_AB`.
pub fn exchange_with_gate(gate: LocalGate, layout: &ProcessorLayout, n: usize) -> Result<FullOperator> {
    local_gate_v_b(gate, layout, n)?.compose(&permutation_e_ab(layout, n)?)
}

/// Input and output of one gate demonstration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateDemo {
    pub name: String,
    pub n: usize,
    pub a_sites: Vec<usize>,
    pub b_sites: Vec<usize>,
    pub input: String,
    /// `(full bitstring, B register bits, amplitude re, amplitude im)`.
    pub output: Vec<(String, String, f64, f64)>,
    pub note: String,
}

impl GateDemo {
    pub fn transcript(&self) -> String {
        let mut s = format!(
            "{}: N = {}, A = {:?}, B = {:?}\n  input  {}\n",
            self.name, self.n, self.a_sites, self.b_sites, self.input
        );
        for (full, reg, re, im) in &self.output {
            s.push_str(&format!("  output |{full}>  (B = |{reg}>)  amplitude {re:+.12} {im:+.12}i\n"));
        }
        s.push_str(&format!("  {}\n", self.note));
        s
    }
}

fn run_demo(
    name: &str,
    gate: LocalGate,
    layout: ProcessorLayout,
    n: usize,
    input: usize,
    note: &str,
) -> Result<GateDemo> {
    let p = exchange_with_gate(gate, &layout, n)?;
    let out = p.apply_state(&FullState::basis(n, input)?)?;
    let output = out
        .support(1e-14)
        .into_iter()
        .map(|(bits, a)| {
            let idx = bits.chars().enumerate().filter(|(_, c)| *c == '1').map(|(i, _)| 1 << i).sum();
            (bits, layout.register_bits(idx, true), a.re, a.im)
        })
        .collect();
    Ok(GateDemo {
        name: name.into(),
        n,
        input: format!("|{}>  (A = |{}>)", bitstring(input, n), layout.register_bits(input, false)),
        a_sites: layout.a_sites.clone(),
        b_sites: layout.b_sites.clone(),
        output,
        note: note.into(),
    })
}

/// Transfer, amplification and remote-exchange examples.
pub fn gate_demos() -> Result<Vec<GateDemo>> {
    let transfer = run_demo(
        "state transfer (V_B = 1)",
        LocalGate::Identity,
        ProcessorLayout::new(vec![1, 2], vec![3, 4], 4)?,
        4,
        0b0010,
        "register A content moves unchanged to B",
    )?;
    let amplification = run_demo(
        "amplification (V_B = sx sx sx)",
        LocalGate::XxxFlip,
        ProcessorLayout::new(vec![1, 2, 3], vec![4, 5, 6], 6)?,
        6,
        0,
        "|000>_A ends as |111>_B; the magnon number changes from 0 to 3",
    )?;
    let exchange = run_demo(
        "remote exchange (V_B = exp(-i pi sx sx / 4))",
        LocalGate::RemoteExchange,
        ProcessorLayout::new(vec![1, 2], vec![3, 4], 4)?,
        4,
        0b0010,
        "amplitudes as computed: (|01> - i|10>)/sqrt(2) on B; the pure -i|10> needs exp(-i pi sx sx / 2)",
    )?;
    Ok(vec![transfer, amplification, exchange])
}
