import math

import numpy as np
import pytest
import torch

from duotoon import losses
from duotoon.losses import LossWeights, RandomPyramidExtractor
from duotoon.network import ColorDiscriminator, MultiTextureDiscriminator, get_preset


def fd_gradient_check(loss_fn, x0, n_probe=5, h=1e-5, rel_tol=1e-3):
    """Central finite differences against autograd at the largest-gradient
    coordinates, float64."""
    x = x0.clone().double().requires_grad_(True)
    loss_fn(x).backward()
    grad = x.grad.detach().flatten()
    order = torch.argsort(grad.abs(), descending=True)[:n_probe]
    base = x.detach().flatten()
    for i in order:
        step = torch.zeros_like(base)
        step[i] = h
        lp = loss_fn((base + step).reshape(x0.shape)).item()
        lm = loss_fn((base - step).reshape(x0.shape)).item()
        fd = (lp - lm) / (2 * h)
        gi = grad[i].item()
        assert abs(fd - gi) <= rel_tol * max(abs(fd), abs(gi), 1e-12), (fd, gi)


@pytest.fixture(scope="module")
def extractor64():
    return RandomPyramidExtractor(seed=0).double()


@pytest.fixture(scope="module")
def disc64():
    return MultiTextureDiscriminator(get_preset("desk")).double()


def rand_l(seed, size=8, batch=1):
    g = torch.Generator().manual_seed(seed)
    return (torch.rand((batch, 1, size, size), generator=g, dtype=torch.float64) * 2 - 1) * 0.9


class _ZeroDisc:
    def __call__(self, x, level=None):
        return torch.zeros(x.shape[0], 1, 2, 2, dtype=x.dtype)


class _PerfectDisc:
    def __call__(self, x, level=None):
        sign = 1.0 if getattr(self, "says_real", True) else -1.0
        return torch.full((x.shape[0], 1, 2, 2), 30.0 * sign, dtype=x.dtype)


class TestAdversarial:
    def test_zero_logit_d_loss_is_two_log_two(self):
        x = rand_l(0)
        loss = losses.adv_texture_d(_ZeroDisc(), x, x, level=1)
        assert abs(loss.item() - 2 * math.log(2)) < 1e-9

    def test_perfect_d_loss_near_zero(self):
        real_d = _PerfectDisc()
        fake_d = _PerfectDisc()
        fake_d.says_real = False
        loss = losses.d_adv_loss(real_d(rand_l(1)), fake_d(rand_l(2)))
        assert loss.item() < 1e-8

    def test_g_adv_gradient_matches_fd(self, disc64):
        fake = rand_l(3)
        fd_gradient_check(lambda x: losses.adv_texture_g(disc64, x, level=2), fake)

    def test_d_step_detaches_fake(self, disc64):
        fake = rand_l(4).requires_grad_(True)
        loss = losses.adv_texture_d(disc64, rand_l(5), fake, level=1)
        loss.backward()
        assert fake.grad is None or torch.all(fake.grad == 0)

    def test_level_routed(self, disc64):
        x = rand_l(6)
        a = losses.adv_texture_g(disc64, x, level=1)
        b = losses.adv_texture_g(disc64, x, level=5)
        assert a.item() != b.item()


class TestContentLoss:
    def test_identical_inputs_zero(self, extractor64):
        x = rand_l(7)
        assert losses.content_loss(extractor64, x, x).item() == 0.0

    def test_symmetric(self, extractor64):
        a, b = rand_l(8), rand_l(9)
        ab = losses.content_loss(extractor64, a, b).item()
        ba = losses.content_loss(extractor64, b, a).item()
        assert abs(ab - ba) < 1e-12

    def test_gradient_matches_fd(self, extractor64):
        src = rand_l(10)
        out0 = rand_l(11)
        fd_gradient_check(lambda x: losses.content_loss(extractor64, src, x), out0)

    def test_shape_mismatch(self, extractor64):
        with pytest.raises(ValueError):
            losses.content_loss(extractor64, rand_l(12, size=8), rand_l(13, size=16))


class TestGram:
    def test_constant_feature_analytic(self):
        # constant value v over a (1, C, H, W) map: every entry v^2*H*W/(C*H*W) = v^2/C
        v, c = 0.3, 2
        features = torch.full((1, c, 2, 2), v, dtype=torch.float64)
        g = losses.gram(features)
        assert torch.allclose(g, torch.full((1, c, c), v**2 / c, dtype=torch.float64), atol=1e-12)

    def test_identical_inputs_zero(self, extractor64):
        x = rand_l(14)
        assert losses.gram_loss(extractor64, x, x).item() == 0.0

    def test_gram_symmetric_psd(self, extractor64):
        g = losses.gram(extractor64(rand_l(15)))[0]
        assert torch.allclose(g, g.T, atol=1e-10)
        eigvals = torch.linalg.eigvalsh(g)
        assert eigvals.min().item() >= -1e-8

    def test_different_sizes_allowed(self, extractor64):
        # target and output may differ in resolution; Gram is size-agnostic
        loss = losses.gram_loss(extractor64, rand_l(16, size=16), rand_l(17, size=8))
        assert torch.isfinite(loss)

    def test_gradient_matches_fd(self, extractor64):
        target = rand_l(18)
        out0 = rand_l(19)
        fd_gradient_check(lambda x: losses.gram_loss(extractor64, target, x), out0)

    def test_empty_feature_rejected(self):
        with pytest.raises(ValueError):
            losses.gram(torch.zeros(1, 3, 0, 0))


class TestTvLoss:
    def test_constant_zero(self):
        assert losses.tv_loss(torch.full((1, 1, 5, 5), 0.7)).item() == 0.0

    def test_one_by_two(self):
        img = torch.tensor([[[[0.2, 0.9]]]], dtype=torch.float64)
        assert abs(losses.tv_loss(img).item() - 0.7) < 1e-12

    def test_two_by_two_enumeration(self):
        # [[0,1],[0,1]]: x-diffs {1,1} mean 1; y-diffs {0,0} mean 0 -> 1.0
        img = torch.tensor([[[[0.0, 1.0], [0.0, 1.0]]]], dtype=torch.float64)
        assert abs(losses.tv_loss(img).item() - 1.0) < 1e-12

    def test_single_pixel_rejected(self):
        with pytest.raises(ValueError):
            losses.tv_loss(torch.zeros(1, 1, 1, 1))

    def test_gradient_matches_fd(self):
        fd_gradient_check(losses.tv_loss, rand_l(20))


class TestTotals:
    def test_all_zero_components(self):
        z = torch.tensor(0.0)
        assert losses.total_texture_loss(z, z, z, z, LossWeights()).item() == 0.0

    def test_adv_only_weights(self):
        w = LossWeights(texture=(1.0, 0.0, 0.0, 0.0))
        adv = torch.tensor(0.37)
        total = losses.total_texture_loss(adv, torch.tensor(5.0), torch.tensor(7.0), torch.tensor(9.0), w)
        assert total.item() == pytest.approx(0.37)

    def test_default_weight_combination(self):
        a, c, g, t = (torch.tensor(v, dtype=torch.float64) for v in (2.0, 3.0, 5.0, 7.0))
        total = losses.total_texture_loss(a, c, g, t, LossWeights())
        expected = 1.0 * 2.0 + 0.0025 * 3.0 + 0.0045 * 5.0 + 0.0015 * 7.0
        assert total.item() == pytest.approx(expected, rel=1e-9)

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            LossWeights(texture=(1.0, -0.1, 0.0, 0.0))


class TestColorRecon:
    def test_identical_zero(self):
        x = torch.rand(1, 2, 8, 8)
        assert losses.color_recon_loss(x, x).item() == 0.0

    def test_constant_offset(self):
        x = torch.rand(1, 2, 8, 8, dtype=torch.float64)
        d = 0.21
        assert losses.color_recon_loss(x, x + d).item() == pytest.approx(d**2, rel=1e-9)

    def test_gradient_closed_form_and_fd(self):
        target = rand_l(21).repeat(1, 2, 1, 1)
        pred0 = rand_l(22).repeat(1, 2, 1, 1).contiguous()

        pred = pred0.clone().requires_grad_(True)
        losses.color_recon_loss(target, pred).backward()
        closed = 2 * (pred0 - target) / pred0.numel()
        assert torch.allclose(pred.grad, closed, atol=1e-12)

        fd_gradient_check(lambda x: losses.color_recon_loss(target, x), pred0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            losses.color_recon_loss(torch.zeros(1, 2, 8, 8), torch.zeros(1, 2, 4, 4))


class TestColorFinetune:
    def test_zero_adv_weight_reduces_to_recon(self):
        w = LossWeights(color_finetune=(1.0, 0.0))
        recon = torch.tensor(0.5)
        total = losses.color_finetune_loss(recon, torch.tensor(100.0), w)
        assert total.item() == pytest.approx(0.5)

    def test_both_zero(self):
        z = torch.tensor(0.0)
        assert losses.color_finetune_loss(z, z, LossWeights()).item() == 0.0

    def test_gradient_matches_fd(self):
        disc = ColorDiscriminator(get_preset("desk")).double()
        target = rand_l(23).repeat(1, 2, 1, 1).contiguous()

        def loss_fn(x):
            recon = losses.color_recon_loss(target, x)
            adv = losses.adv_color_g(disc, x)
            return losses.color_finetune_loss(recon, adv, LossWeights())

        fd_gradient_check(loss_fn, rand_l(24).repeat(1, 2, 1, 1).contiguous())


class TestExtractor:
    def test_frozen_parameters(self, extractor64):
        assert all(not p.requires_grad for p in extractor64.parameters())

    def test_bitwise_constant_across_steps(self):
        extractor = RandomPyramidExtractor(seed=1)
        before = [p.detach().clone() for p in extractor.parameters()]
        probe = torch.nn.Conv2d(1, 1, 3, padding=1)
        opt = torch.optim.Adam(probe.parameters(), lr=1e-2)
        for _ in range(3):
            x = torch.rand(1, 1, 16, 16)
            loss = losses.content_loss(extractor, x, probe(x))
            opt.zero_grad()
            loss.backward()
            opt.step()
        for p, b in zip(extractor.parameters(), before):
            assert torch.equal(p.detach(), b)

    def test_seeded_determinism(self):
        a = RandomPyramidExtractor(seed=3)
        b = RandomPyramidExtractor(seed=3)
        x = torch.rand(1, 1, 16, 16)
        assert torch.equal(a(x), b(x))

    def test_fallback_warns(self, caplog):
        import logging

        with caplog.at_level(logging.WARNING, logger="duotoon.losses"):
            extractor = losses.load_perceptual_extractor("/nonexistent/vgg19.npz")
        assert isinstance(extractor, RandomPyramidExtractor)
        assert any("random-pyramid" in r.message for r in caplog.records)

    def test_vgg19_loader_shapes(self, tmp_path):
        rng = np.random.default_rng(0)
        arrays = {}
        for name, in_ch, out_ch in losses._VGG19_PLAN:
            if name == "pool":
                continue
            arrays[f"{name}.weight"] = rng.normal(0, 0.01, (out_ch, in_ch, 3, 3)).astype(np.float32)
            arrays[f"{name}.bias"] = np.zeros(out_ch, dtype=np.float32)
        path = tmp_path / "vgg19.npz"
        np.savez(path, **arrays)
        extractor = losses.load_perceptual_extractor(path)
        assert isinstance(extractor, losses.Vgg19Extractor)
        out = extractor(torch.rand(1, 1, 32, 32) * 2 - 1)
        assert out.shape == (1, 512, 4, 4)  # x8 downsample at the conv4_4 level

    def test_caffe_preprocess_convention(self):
        x = torch.zeros(1, 1, 2, 2)  # net L = 0 -> 127.5 gray
        pre = losses.caffe_preprocess(x)
        assert pre.shape == (1, 3, 2, 2)
        expected = torch.tensor([127.5 - m for m in losses.CAFFE_BGR_MEANS]).view(1, 3, 1, 1)
        assert torch.allclose(pre, expected.expand(1, 3, 2, 2))


class TestTranslationInvariance:
    @staticmethod
    def _place(content, offset, canvas=128):
        out = torch.zeros((1, 1, canvas, canvas), dtype=torch.float64)
        size = content.shape[-1]
        out[..., offset : offset + size, offset : offset + size] = content
        return out

    def test_gram_and_content_shift_stability(self, extractor64):
        # translate the same content inside a 32px-padded canvas by a
        # pool-aligned shift; only boundary effects may move the loss
        g = torch.Generator().manual_seed(25)
        a = torch.rand((1, 1, 64, 64), generator=g, dtype=torch.float64) * 2 - 1
        b = torch.rand((1, 1, 64, 64), generator=g, dtype=torch.float64) * 2 - 1
        for loss_fn in (losses.gram_loss, losses.content_loss):
            base = loss_fn(extractor64, self._place(a, 32), self._place(b, 32)).item()
            shifted = loss_fn(extractor64, self._place(a, 40), self._place(b, 40)).item()
            assert abs(shifted - base) <= 0.05 * max(base, 1e-9)
