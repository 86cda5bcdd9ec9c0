//! Parameter containers for the standard blocks: linear maps, layer norm,
//! and pre-norm attention layers (self-attention with optional cross
//! attention plus a ×4 GELU feed-forward).

use rand_chacha::ChaCha12Rng;

use super::tape::{Graph, ParamStore, Var};

/// `y = x W + b`.
#[derive(Debug, Clone)]
pub struct Linear {
    pub w: usize,
    pub b: Option<usize>,
}

impl Linear {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        c_in: usize,
        c_out: usize,
        bias: bool,
        rng: &mut ChaCha12Rng,
    ) -> Self {
        let w = store.matrix(&format!("{name}.w"), c_in, c_out, rng);
        let b = bias.then(|| store.vector(&format!("{name}.b"), c_out, 0.0));
        Self { w, b }
    }

    pub fn apply(&self, g: &mut Graph, store: &ParamStore, x: Var) -> Var {
        let w = g.param(store, self.w);
        let b = self.b.map(|id| g.param(store, id));
        g.linear(x, w, b)
    }
}

/// Per-token normalization with learned gain and bias.
#[derive(Debug, Clone)]
pub struct LayerNorm {
    pub gain: usize,
    pub bias: usize,
}

impl LayerNorm {
    pub fn new(store: &mut ParamStore, name: &str, c: usize) -> Self {
        Self {
            gain: store.vector(&format!("{name}.gain"), c, 1.0),
            bias: store.vector(&format!("{name}.bias"), c, 0.0),
        }
    }

    pub fn apply(&self, g: &mut Graph, store: &ParamStore, x: Var) -> Var {
        let gain = g.param(store, self.gain);
        let bias = g.param(store, self.bias);
        g.layer_norm(x, gain, bias)
    }
}

/// Multi-head attention projections.
#[derive(Debug, Clone)]
pub struct AttentionLayer {
    pub wq: Linear,
    pub wk: Linear,
    pub wv: Linear,
    pub wo: Linear,
    pub n_heads: usize,
}

impl AttentionLayer {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        d_model: usize,
        n_heads: usize,
        rng: &mut ChaCha12Rng,
    ) -> Self {
        Self {
            wq: Linear::new(store, &format!("{name}.q"), d_model, d_model, true, rng),
            wk: Linear::new(store, &format!("{name}.k"), d_model, d_model, true, rng),
            wv: Linear::new(store, &format!("{name}.v"), d_model, d_model, true, rng),
            wo: Linear::new(store, &format!("{name}.o"), d_model, d_model, true, rng),
            n_heads,
        }
    }

    /// `queries` attends over `keys` (pass the same var for self-attention).
    pub fn apply(&self, g: &mut Graph, store: &ParamStore, queries: Var, keys: Var) -> Var {
        let q = self.wq.apply(g, store, queries);
        let k = self.wk.apply(g, store, keys);
        let v = self.wv.apply(g, store, keys);
        let o = g.attention(q, k, v, self.n_heads);
        self.wo.apply(g, store, o)
    }
}

/// Pre-norm transformer layer: self-attention, optional cross attention,
/// then a ×4 GELU feed-forward, all with residual connections.
#[derive(Debug, Clone)]
pub struct EncoderLayer {
    pub ln_attn: LayerNorm,
    pub attn: AttentionLayer,
    pub cross: Option<(LayerNorm, AttentionLayer)>,
    pub ln_ff: LayerNorm,
    pub ff1: Linear,
    pub ff2: Linear,
}

impl EncoderLayer {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        d_model: usize,
        n_heads: usize,
        with_cross: bool,
        rng: &mut ChaCha12Rng,
    ) -> Self {
        Self {
            ln_attn: LayerNorm::new(store, &format!("{name}.ln_attn"), d_model),
            attn: AttentionLayer::new(store, &format!("{name}.attn"), d_model, n_heads, rng),
            cross: with_cross.then(|| {
                (
                    LayerNorm::new(store, &format!("{name}.ln_cross"), d_model),
                    AttentionLayer::new(store, &format!("{name}.cross"), d_model, n_heads, rng),
                )
            }),
            ln_ff: LayerNorm::new(store, &format!("{name}.ln_ff"), d_model),
            ff1: Linear::new(store, &format!("{name}.ff1"), d_model, 4 * d_model, true, rng),
            ff2: Linear::new(store, &format!("{name}.ff2"), 4 * d_model, d_model, true, rng),
        }
    }

    pub fn apply(&self, g: &mut Graph, store: &ParamStore, x: Var, context: Option<Var>) -> Var {
        let normed = self.ln_attn.apply(g, store, x);
        let attended = self.attn.apply(g, store, normed, normed);
        let mut h = g.add(x, attended);
        if let Some((ln, cross)) = &self.cross {
            let ctx = context.expect("cross-attention layer needs a context");
            let normed = ln.apply(g, store, h);
            let attended = cross.apply(g, store, normed, ctx);
            h = g.add(h, attended);
        }
        let normed = self.ln_ff.apply(g, store, h);
        let ff = self.ff1.apply(g, store, normed);
        let ff = g.gelu(ff);
        let ff = self.ff2.apply(g, store, ff);
        g.add(h, ff)
    }
}
