"""
Model blocks
------------
Building blocks of the CSI-4CAST predictor. Blocks work on a batch axis
B' = samples*antennas; each antenna's (time, subcarrier) matrix is handled
independently with shared weights.

Layouts
    real stack        (B', 2, T, N)   channel 0 real, channel 1 imaginary
    frequency matrix  (B', T, 2N)     columns [0, N) real, [N, 2N) imaginary
    embedding         (B', T, gamma)

Created: Autumn 2026
"""

import math

import torch
import torch.nn as nn

from csicast.utils.errors import ConfigError


_ACTIVATIONS = {
    'relu': nn.ReLU,
    'gelu': nn.GELU,
    'tanh': nn.Tanh,
    'sigmoid': nn.Sigmoid,
    'elu': nn.ELU,
    'none': nn.Identity,
    'identity': nn.Identity,
}


def activation(name):
    """Activation module by name."""
    try:
        return _ACTIVATIONS[name]()
    except KeyError:
        raise ConfigError(
            "\n\tUnknown activation '{}'. Available: {}\n".format(
                name, ', '.join(_ACTIVATIONS)))


def init_weights(module):
    """Fan-in scaled uniform weights and zero biases."""
    if isinstance(module, (nn.Linear, nn.Conv1d, nn.Conv2d)):
        nn.init.kaiming_uniform_(module.weight, a=math.sqrt(5))
        if module.bias is not None:
            nn.init.zeros_(module.bias)


# Layout conversions
def real_stack(x):
    """Complex (..., T, N) to real (..., 2, T, N)."""
    return torch.stack([x.real, x.imag], dim=-3)


def complex_restack(x):
    """Inverse of real_stack."""
    return torch.complex(x[..., 0, :, :], x[..., 1, :, :])


def to_frequency_matrix(x):
    """Real stack (..., 2, T, N) to frequency matrix (..., T, 2N)."""
    return torch.cat([x[..., 0, :, :], x[..., 1, :, :]], dim=-1)


def from_frequency_matrix(x):
    """Frequency matrix (..., T, 2N) to real stack (..., 2, T, N)."""
    n = x.shape[-1]//2
    return torch.stack([x[..., :n], x[..., n:]], dim=-3)


def _as_complex(x):
    n = x.shape[-1]//2
    return torch.complex(x[..., :n], x[..., n:])


def _as_real(z):
    return torch.cat([z.real, z.imag], dim=-1)


def idft_delay_transform(x_f):
    """
    Delay-domain representation: every row, read as a complex vector, is
    right-multiplied by the conjugate transpose of the unitary DFT matrix.
    """
    return _as_real(torch.fft.ifft(_as_complex(x_f), dim=-1, norm='ortho'))


def dft_transform(x_d):
    """Inverse of idft_delay_transform."""
    return _as_real(torch.fft.fft(_as_complex(x_d), dim=-1, norm='ortho'))


def cnn_schedule(depth):
    """Symmetric channel schedule [2, 4, ..., 2**depth, ..., 4, 2]."""
    if depth < 1:
        raise ConfigError("CNN depth must be at least 1")
    up = [2**i for i in range(1, depth + 1)]
    sched = up + up[-2::-1]
    return sched if len(sched) > 1 else [2, 2]


class CnnResidual(nn.Module):
    """
    Same-padded 2D convolutions over (time, subcarrier) on the real stack.
    Hidden layers are conv, batch norm and activation; the last layer is a
    plain convolution. With a residual connection the last layer starts at
    zero so the block starts as the identity.
    """

    def __init__(self, channels, kernel=(3, 3), residual=True,
                 act='relu'):
        super().__init__()
        channels = list(channels)
        if channels != channels[::-1] or channels[0] != 2 or\
                len(channels) < 2:
            raise ConfigError(
                "\n\tCNN channel schedule {} must be symmetric and start and "
                "end with 2 channels\n".format(channels))
        self.residual = residual
        layers = []
        for i, (cin, cout) in enumerate(zip(channels[:-1], channels[1:])):
            layers.append(nn.Conv2d(cin, cout, tuple(kernel), padding='same'))
            if i < len(channels) - 2:
                layers.append(nn.BatchNorm2d(cout))
                layers.append(activation(act))
        self.branch = nn.Sequential(*layers)
        self.apply(init_weights)
        if residual:
            nn.init.zeros_(self.branch[-1].weight)
            nn.init.zeros_(self.branch[-1].bias)

    def forward(self, x):
        out = self.branch(x)
        return x + out if self.residual else out


def cnn_residual(module, x):
    """Functional form of CnnResidual: (B', 2, T, N) to (B', 2, T, N)."""
    return module(x)


class AdaptiveCorrection(nn.Module):
    """
    Residual MLP correction x <- MLP(x) (+ or *) x along one axis.

    Parameters
    ----------
    dim: int
        Length of the vectors the MLP maps
    layers: int
        Number of linear layers (1 gives a single linear map)
    combine: str
        'add' or 'multiply'
    """

    def __init__(self, dim, layers=2, hidden=64, act='relu',
                 out_act='none', combine='add'):
        super().__init__()
        if combine not in ('add', 'multiply'):
            raise ConfigError(
                "\n\tACL combine op must be 'add' or 'multiply', got "
                "'{}'\n".format(combine))
        if layers < 1:
            raise ConfigError("ACL needs at least one layer")
        self.combine = combine
        if layers == 1:
            mods = [nn.Linear(dim, dim)]
        else:
            mods = [nn.Linear(dim, hidden), activation(act)]
            for _ in range(layers - 2):
                mods += [nn.Linear(hidden, hidden), activation(act)]
            mods.append(nn.Linear(hidden, dim))
        mods.append(activation(out_act))
        self.mlp = nn.Sequential(*mods)
        self.apply(init_weights)

    def forward(self, x):
        y = self.mlp(x)
        return x + y if self.combine == 'add' else x*y


class AclStage(nn.Module):
    """
    Time-axis correction on every column of a (T, 2N) matrix, followed by
    an optional subcarrier-axis correction on every row (FDD).
    """

    def __init__(self, hist_len, n_sc, layers=2, hidden=64, act='relu',
                 out_act='none', combine='add', subcarrier=False):
        super().__init__()
        self.time = AdaptiveCorrection(hist_len, layers, hidden, act,
                                       out_act, combine)
        self.subcarrier = AdaptiveCorrection(
            2*n_sc, layers, hidden, act, out_act, combine)\
            if subcarrier else None

    def forward(self, x, apply_subcarrier=None):
        if apply_subcarrier is None:
            apply_subcarrier = self.subcarrier is not None
        if apply_subcarrier and self.subcarrier is None:
            raise ConfigError("Subcarrier correction is only built for FDD")
        x = self.time(x.transpose(-1, -2)).transpose(-1, -2)
        if apply_subcarrier:
            x = self.subcarrier(x)
        return x


def acl_forward(module, x, apply_subcarrier):
    """
    Functional form of AclStage on a frequency matrix (B', T, 2N); the
    subcarrier correction runs only when 'apply_subcarrier' is set.
    """
    return module(x, apply_subcarrier)


def channel_shuffle(x, groups):
    """
    Channel shuffle: reshape channels to (groups, C/groups), transpose and
    flatten.
    """
    b, c = x.shape[:2]
    if c % groups:
        raise ConfigError("{} channels cannot be split into {} groups".format(
            c, groups))
    rest = x.shape[2:]
    x = x.reshape(b, groups, c//groups, *rest).transpose(1, 2)
    return x.reshape(b, c, *rest)


class ShuffleBlock(nn.Module):
    """
    Grouped pointwise conv, channel shuffle, depthwise conv and grouped
    pointwise conv, gated channel-wise by squeeze-and-excitation.
    """

    def __init__(self, maps, groups, kernel=3, act='relu', se_ratio=4,
                 dropout=0.0):
        super().__init__()
        if maps % groups:
            raise ConfigError(
                "\n\tShuffleNet feature maps ({}) must be divisible by the "
                "number of groups ({})\n".format(maps, groups))
        self.groups = groups
        self.pw1 = nn.Conv2d(maps, maps, 1, groups=groups)
        self.act = activation(act)
        self.dw = nn.Conv2d(maps, maps, kernel, padding='same', groups=maps)
        self.pw2 = nn.Conv2d(maps, maps, 1, groups=groups)
        hidden = max(1, maps//se_ratio)
        self.se = nn.Sequential(nn.AdaptiveAvgPool2d(1), nn.Flatten(),
                                nn.Linear(maps, hidden), activation(act),
                                nn.Linear(hidden, maps), nn.Sigmoid())
        self.drop = nn.Dropout(dropout)
        self.apply(init_weights)

    def extract(self, x):
        x = self.act(self.pw1(x))
        x = channel_shuffle(x, self.groups)
        return self.pw2(self.dw(x))

    def excite(self, fe):
        """Channel gate of shape (B', maps, 1, 1)."""
        return self.se(fe)[:, :, None, None]

    def forward(self, x):
        fe = self.extract(x)
        return self.drop(self.excite(fe)*fe)


def shuffle_block_forward(block, x):
    """One shuffle block on (B', maps, T, 2N) feature maps, shape kept."""
    return block(x)


class ShuffleStage(nn.Module):
    """
    Frequency matrix to real stack, 1x1 projection to 'maps' channels,
    shuffle blocks, projection back to 2 channels and flattening.
    """

    def __init__(self, maps=16, groups=4, kernel=3, blocks=2, act='relu',
                 se_ratio=4, dropout=0.0):
        super().__init__()
        self.proj_in = nn.Conv2d(2, maps, 1)
        self.blocks = nn.Sequential(*[
            ShuffleBlock(maps, groups, kernel, act, se_ratio, dropout)
            for _ in range(blocks)])
        self.proj_out = nn.Conv2d(maps, 2, 1)
        init_weights(self.proj_in)
        init_weights(self.proj_out)

    def forward(self, x):
        y = self.proj_in(from_frequency_matrix(x))
        for block in self.blocks:
            y = shuffle_block_forward(block, y)
        return to_frequency_matrix(self.proj_out(y))


def shuffle_stage(module, x):
    """Functional form of ShuffleStage: (B', T, 2N) to (B', T, 2N)."""
    return module(x)


def position_embedding(hist_len, d_model, dtype=torch.float32):
    """
    Sinusoidal embedding with base hist_len; rows are positions, columns
    latent indices. PE[v, u] = sin(v/T**(u/d)) for even u and
    cos(v/T**((u-1)/d)) for odd u.
    """
    if d_model < 2:
        raise ConfigError("Latent dimension must be at least 2")
    v = torch.arange(hist_len, dtype=torch.float64)[:, None]
    u = torch.arange(d_model)
    even = (u - u % 2).to(torch.float64)
    angle = v/float(hist_len)**(even/d_model)[None, :]
    pe = torch.where(u % 2 == 0, torch.sin(angle), torch.cos(angle))
    return pe.to(dtype)


class TransformerEncode(nn.Module):
    """
    Token embedding (1x1 convolution over the 2N features of each time
    step), fixed position embedding and a stack of full-attention encoder
    layers.
    """

    def __init__(self, hist_len, n_sc, d_model=64, n_layers=2, n_heads=4,
                 ffn_dim=128, dropout=0.1, act='gelu'):
        super().__init__()
        if d_model % n_heads:
            raise ConfigError(
                "\n\t{} attention heads do not divide the latent dimension "
                "{}\n".format(n_heads, d_model))
        if act not in ('relu', 'gelu'):
            raise ConfigError("Transformer activation must be relu or gelu")
        self.token = nn.Conv1d(2*n_sc, d_model, 1)
        self.register_buffer('pe', position_embedding(hist_len, d_model))
        layer = nn.TransformerEncoderLayer(
            d_model, n_heads, dim_feedforward=ffn_dim, dropout=dropout,
            activation=act, batch_first=True)
        self.encoder = nn.TransformerEncoder(layer, n_layers,
                                             enable_nested_tensor=False)
        init_weights(self.token)

    def embed(self, x):
        """(B', T, 2N) to token embedding (B', T, d_model)."""
        return self.token(x.transpose(1, 2)).transpose(1, 2)

    def encode(self, x_te, pe):
        return self.encoder(x_te + pe)

    def forward(self, x):
        return self.encode(self.embed(x), self.pe.to(x.dtype))


def transformer_encode(module, x_te, pe):
    """
    Encoder stack of 'module' on token embeddings (B', T, d_model) plus
    the position embedding 'pe' (T, d_model).
    """
    return module.encode(x_te, pe)


class PredictionHead(nn.Module):
    """
    Linear map d_model -> 2N per time step, then T -> P per feature
    column; returns complex (B', P, N).
    """

    def __init__(self, hist_len, pred_len, n_sc, d_model):
        super().__init__()
        self.mlp_a = nn.Linear(d_model, 2*n_sc)
        self.mlp_b = nn.Linear(hist_len, pred_len)
        self.apply(init_weights)

    def forward(self, x):
        y = self.mlp_a(x)
        y = self.mlp_b(y.transpose(1, 2)).transpose(1, 2)
        return complex_restack(from_frequency_matrix(y))


def prediction_head(module, x):
    """Functional form of PredictionHead: (B', T, d_model) to complex
    (B', P, N)."""
    return module(x)
