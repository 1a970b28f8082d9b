//! Evaluation backends for GF(2) circuits: a plaintext one that only
//! counts gates, and a simulated multi-party one using Beaver triples.

use crate::bitlinalg::BitBlock;
use crate::sharing::TriplePool;

use super::MpcError;

/// Gate-level interface the circuits are written against. Values are
/// vectors of bits processed in lockstep; every call to [`Engine::and_layer`]
/// is one layer of multiplicative depth.
pub trait Engine {
    type V: Clone;

    fn len(v: &Self::V) -> usize;
    /// A secret zero vector.
    fn zeros(&self, len: usize) -> Self::V;
    fn xor(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn xor_const(&self, a: &Self::V, c: &BitBlock) -> Self::V;
    fn and_const(&self, a: &Self::V, c: &BitBlock) -> Self::V;
    /// Applies a GF(2)-linear map without communication.
    fn map_local(&self, a: &Self::V, f: &dyn Fn(&BitBlock) -> BitBlock) -> Self::V;
    /// Element-wise products of all pairs in one round.
    fn and_layer(&mut self, pairs: &[(&Self::V, &Self::V)]) -> Result<Vec<Self::V>, MpcError>;
}

/// Evaluates in the clear and counts layers and AND gates.
#[derive(Debug, Default, Clone)]
pub struct PlainEngine {
    pub layers: usize,
    pub and_gates: usize,
}

impl Engine for PlainEngine {
    type V = BitBlock;

    fn len(v: &BitBlock) -> usize {
        v.len()
    }

    fn zeros(&self, len: usize) -> BitBlock {
        BitBlock::zeros(len)
    }

    fn xor(&self, a: &BitBlock, b: &BitBlock) -> BitBlock {
        a ^ b
    }

    fn xor_const(&self, a: &BitBlock, c: &BitBlock) -> BitBlock {
        a ^ c
    }

    fn and_const(&self, a: &BitBlock, c: &BitBlock) -> BitBlock {
        a.and(c).expect("equal lengths")
    }

    fn map_local(&self, a: &BitBlock, f: &dyn Fn(&BitBlock) -> BitBlock) -> BitBlock {
        f(a)
    }

    fn and_layer(&mut self, pairs: &[(&BitBlock, &BitBlock)]) -> Result<Vec<BitBlock>, MpcError> {
        self.layers += 1;
        Ok(pairs
            .iter()
            .map(|(a, b)| {
                self.and_gates += a.len();
                a.and(b).expect("equal lengths")
            })
            .collect())
    }
}

/// XOR shares held by each party, index = party id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shared(pub Vec<BitBlock>);

/// Counts rounds and traffic of the simulated parties and optionally keeps
/// everything party 0 receives.
#[derive(Debug, Default, Clone)]
pub struct Router {
    pub rounds: usize,
    pub bytes: u64,
    pub view: Option<Vec<BitBlock>>,
}

impl Router {
    /// One synchronous round in which every party sends `msgs[p]` to every
    /// other party.
    fn broadcast(&mut self, msgs: &[BitBlock]) {
        self.rounds += 1;
        let parties = msgs.len() as u64;
        let per_party: u64 = msgs.first().map_or(0, |m| m.len().div_ceil(8) as u64);
        self.bytes += parties * (parties - 1) * per_party;
        if let Some(view) = &mut self.view {
            view.extend(msgs[1..].iter().cloned());
        }
    }
}

/// Passive-secure GMW-style evaluation: XOR gates are local, each AND
/// opens `x ⊕ a` and `y ⊕ b` for a fresh dealer triple.
pub struct MpcEngine<'a> {
    parties: usize,
    pool: &'a mut TriplePool,
    pub router: Router,
    pub and_gates: usize,
}

impl<'a> MpcEngine<'a> {
    pub fn new(pool: &'a mut TriplePool, record_view: bool) -> Self {
        MpcEngine {
            parties: pool.n_parties(),
            pool,
            router: Router {
                view: record_view.then(Vec::new),
                ..Router::default()
            },
            and_gates: 0,
        }
    }

    pub fn parties(&self) -> usize {
        self.parties
    }
}

impl Engine for MpcEngine<'_> {
    type V = Shared;

    fn len(v: &Shared) -> usize {
        v.0[0].len()
    }

    fn zeros(&self, len: usize) -> Shared {
        Shared(vec![BitBlock::zeros(len); self.parties])
    }

    fn xor(&self, a: &Shared, b: &Shared) -> Shared {
        Shared(a.0.iter().zip(&b.0).map(|(x, y)| x ^ y).collect())
    }

    fn xor_const(&self, a: &Shared, c: &BitBlock) -> Shared {
        let mut out = a.clone();
        out.0[0] ^= c;
        out
    }

    fn and_const(&self, a: &Shared, c: &BitBlock) -> Shared {
        Shared(a.0.iter().map(|x| x.and(c).expect("equal lengths")).collect())
    }

    fn map_local(&self, a: &Shared, f: &dyn Fn(&BitBlock) -> BitBlock) -> Shared {
        Shared(a.0.iter().map(f).collect())
    }

    fn and_layer(&mut self, pairs: &[(&Shared, &Shared)]) -> Result<Vec<Shared>, MpcError> {
        let lens: Vec<usize> = pairs.iter().map(|(a, _)| Self::len(a)).collect();
        let total: usize = lens.iter().sum();
        let batch = self.pool.take(total)?;
        self.and_gates += total;
        let p = self.parties;
        let xs: Vec<BitBlock> = (0..p)
            .map(|i| BitBlock::concat(&pairs.iter().map(|(a, _)| &a.0[i]).collect::<Vec<_>>()))
            .collect();
        let ys: Vec<BitBlock> = (0..p)
            .map(|i| BitBlock::concat(&pairs.iter().map(|(_, b)| &b.0[i]).collect::<Vec<_>>()))
            .collect();
        // each party's masked opening: d_i || e_i
        let msgs: Vec<BitBlock> = (0..p)
            .map(|i| {
                let t = &batch.parties[i];
                BitBlock::concat(&[&(&xs[i] ^ &t.a), &(&ys[i] ^ &t.b)])
            })
            .collect();
        self.router.broadcast(&msgs);
        let mut opened = BitBlock::zeros(2 * total);
        for m in &msgs {
            opened ^= m;
        }
        let d = opened.slice(0, total);
        let e = opened.slice(total, total);
        let de = d.and(&e).expect("equal lengths");
        let z: Vec<BitBlock> = (0..p)
            .map(|i| {
                let t = &batch.parties[i];
                let mut z = &t.c ^ &d.and(&t.b).expect("equal lengths");
                z ^= &e.and(&t.a).expect("equal lengths");
                if i == 0 {
                    z ^= &de;
                }
                z
            })
            .collect();
        let mut out = Vec::with_capacity(pairs.len());
        let mut off = 0;
        for len in lens {
            out.push(Shared(z.iter().map(|zi| zi.slice(off, len)).collect()));
            off += len;
        }
        Ok(out)
    }
}
