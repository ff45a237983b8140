"""Secondary-component acceptance: CRNN sanity plus the toy 3-class task.

The toy dataset is produced end to end through the front-end package's
command-line interface (scene synthesis -> analysis -> beamformed event
WAVs); this suite never imports the front-end, only its file outputs.
Run with ``pytest tests/test_acceptance.py -v -s`` for the PASS lines.
"""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
import torch

from seldcrnn import (CrnnClassifier, extract_patches_from_wav, mixup_batch,
                      parameter_count, predict_event, train, TrainConfig)
from seldcrnn.cli import main as seldcrnn_main
from seldcrnn.model import save_checkpoint
from seldcrnn.training import one_hot, soft_cross_entropy

from conftest import toy_patch_set

KINDS = (("tone", 0), ("noise-burst", 1), ("chirp", 2))
EVENTS_PER_SCENE = 8
EVENT_LEN_S = 0.45
EVENT_SPACING_S = 0.95  # > the 0.4 s grouping gap so events never merge


def report(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}: {detail}", flush=True)
    assert ok, f"{name}: {detail}"


def front_end_cli(*args):
    proc = subprocess.run([sys.executable, "-m", "paraseld.cli", *args],
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"front-end CLI failed: {proc.stderr}")
    return proc


def scene_text(rng, seed):
    lines = [f"duration_s = {0.3 + EVENTS_PER_SCENE * EVENT_SPACING_S + 0.2:.2f}",
             f"seed = {seed}"]
    for i in range(EVENTS_PER_SCENE):
        kind, class_id = KINDS[i % len(KINDS)]
        onset = 0.3 + i * EVENT_SPACING_S
        lines += ["[event]", f"kind = {kind}",
                  f"azimuth_deg = {rng.uniform(-180, 180):.1f}",
                  f"elevation_deg = {rng.uniform(-45, 45):.1f}",
                  f"onset_s = {onset:.2f}",
                  f"offset_s = {onset + EVENT_LEN_S:.2f}",
                  f"class_id = {class_id}"]
        if kind == "tone":
            lines.append(f"freq_hz = {rng.uniform(400, 2500):.1f}")
        elif kind == "chirp":
            lines.append(f"chirp_f0_hz = {rng.uniform(300, 800):.1f}")
            lines.append(f"chirp_f1_hz = {rng.uniform(3000, 7000):.1f}")
        else:
            lines.append(f"band_low_hz = {rng.uniform(300, 600):.1f}")
            lines.append(f"band_high_hz = {rng.uniform(5000, 7500):.1f}")
    return "\n".join(lines) + "\n"


def read_csv(path):
    lines = Path(path).read_text().strip().splitlines()
    return [line.split(",") for line in lines[1:]]


def label_events(analysis_dir, ref_events_csv):
    """Label each est event WAV by the reference event with maximal overlap."""
    refs = [(float(r[1]), float(r[2]), int(r[0])) for r in read_csv(ref_events_csv)]
    labeled = []
    for i, row in enumerate(read_csv(Path(analysis_dir) / "est_events.csv")):
        onset, offset = float(row[1]), float(row[2])
        overlaps = [(min(offset, r_off) - max(onset, r_on), cls)
                    for r_on, r_off, cls in refs]
        best, cls = max(overlaps)
        if best > 0:
            labeled.append((Path(analysis_dir) / f"event_{i}.wav", cls))
    return labeled


@pytest.fixture(scope="module")
def toy_dataset(tmp_path_factory):
    """(train_rows, test_rows) of (wav_path, class) from 15 CLI-built scenes."""
    root = tmp_path_factory.mktemp("toy_scenes")
    rng = np.random.default_rng(97)
    rows = []
    for scene_idx in range(15):
        spec = root / f"scene_{scene_idx}.txt"
        spec.write_text(scene_text(rng, seed=5000 + scene_idx))
        synth_dir = root / f"synth_{scene_idx}"
        front_end_cli("synth", str(spec), "--out", str(synth_dir))
        analysis_dir = root / f"analysis_{scene_idx}"
        front_end_cli("analyze", str(synth_dir / "scene.wav"),
                      "--out", str(analysis_dir))
        rows.append(label_events(analysis_dir,
                                 synth_dir / "scene_ref_events.csv"))
    train_rows = [r for scene in rows[:12] for r in scene]
    test_rows = [r for scene in rows[12:] for r in scene]
    return train_rows, test_rows


def test_parameter_count():
    count = parameter_count(CrnnClassifier())
    report("CRNN parameter count within 10% of 175k",
           157500 <= count <= 192500, f"{count} weights")


def test_softmax_normalization():
    rng = np.random.default_rng(1)
    model = CrnnClassifier()
    probs = model.predict_proba(rng.standard_normal((16, 50, 64)).astype(np.float32))
    ok = bool(np.all(probs >= 0) and np.allclose(probs.sum(axis=1), 1.0, atol=1e-6))
    report("softmax normalization within 1e-6", ok,
           f"max |sum-1| = {np.abs(probs.sum(axis=1) - 1).max():.1e}")


def test_two_sample_overfit():
    rng = np.random.default_rng(2)
    patches, labels = toy_patch_set(rng, n_per_class=1, n_classes=2)
    # patience disabled: with one step per epoch the 200-epoch cap is the
    # whole training budget
    model, log = train(patches, labels,
                       TrainConfig(epochs=200, batch_size=2, seed=0,
                                   use_mixup=False, early_stop_patience=200,
                                   lr_patience=200),
                       n_classes=3, val_fraction=0.0)
    with torch.no_grad():
        pred = model(torch.as_tensor(patches)).argmax(dim=1).numpy()
    report("2-sample overfit reaches 100% training accuracy",
           bool((pred == labels).all()), f"{len(log.epochs)} epochs")


def test_mixup_convexity_on_intercepted_batches():
    rng = np.random.default_rng(3)
    patches, labels = toy_patch_set(rng)
    lo, hi = patches.min(), patches.max()
    seen = []
    train(patches, labels,
          TrainConfig(epochs=2, batch_size=8, seed=0, use_mixup=True,
                      mixup_alpha=0.1),
          n_classes=3, batch_hook=lambda x, y: seen.append((x.copy(), y.copy())))
    ok = bool(seen) and all(
        x.min() >= lo - 1e-5 and x.max() <= hi + 1e-5
        and np.allclose(y.sum(axis=1), 1.0, atol=1e-5)
        for x, y in seen)
    report("mixup batches are convex combinations (alpha = 0.1)",
           ok, f"{len(seen)} batches intercepted")


def test_geometric_mean_order_invariance():
    rng = np.random.default_rng(4)
    model = CrnnClassifier()
    patches = rng.standard_normal((5, 50, 64)).astype(np.float32)
    c1, p1 = predict_event(model, patches)
    c2, p2 = predict_event(model, patches[::-1].copy())
    perm = rng.permutation(5)
    c3, p3 = predict_event(model, patches[perm])
    ok = c1 == c2 == c3 and np.allclose(p1, p2, atol=1e-9) and \
        np.allclose(p1, p3, atol=1e-9)
    report("geometric-mean aggregation is order-invariant", ok)


def test_gradient_vs_finite_differences():
    torch.manual_seed(123)
    model = CrnnClassifier(n_classes=3, conv_filters=(2, 2, 2), gru_units=3,
                           fc_units=4, dropout=0.0).double()
    model.eval()
    rng = np.random.default_rng(5)
    x = torch.as_tensor(rng.standard_normal((3, 50, 64)))
    y = torch.as_tensor(one_hot(np.array([0, 1, 2]), 3).astype(np.float64))
    loss = soft_cross_entropy(model(x), y)
    model.zero_grad()
    loss.backward()
    worst = 0.0
    g_rng = np.random.default_rng(6)
    for _name, param in model.named_parameters():
        flat = param.detach().view(-1)
        grad = param.grad.view(-1)
        for idx in g_rng.choice(flat.numel(), size=min(3, flat.numel()),
                                replace=False):
            h = 1e-5
            with torch.no_grad():
                orig = flat[idx].item()
                flat[idx] = orig + h
                up = soft_cross_entropy(model(x), y).item()
                flat[idx] = orig - h
                down = soft_cross_entropy(model(x), y).item()
                flat[idx] = orig
            numeric = (up - down) / (2 * h)
            analytic = grad[idx].item()
            rel = abs(numeric - analytic) / max(abs(numeric), abs(analytic), 1e-6)
            worst = max(worst, rel)
    report("analytic gradient matches finite differences (<= 1e-3 relative)",
           worst <= 1e-3, f"worst relative error {worst:.1e}")


def test_toy_three_class_task(toy_dataset):
    t0 = time.perf_counter()
    train_rows, test_rows = toy_dataset
    patches, labels = [], []
    for wav, cls in train_rows:
        for patch in extract_patches_from_wav(wav):
            patches.append(patch)
            labels.append(cls)
    # plateau/stop patience scaled up: on ~190 patches an "epoch" is only a
    # handful of optimizer steps, so the default epoch-based patience values
    # fire long before convergence
    model, log = train(np.stack(patches), labels,
                       TrainConfig(epochs=200, seed=0, batch_size=32,
                                   lr_patience=20, early_stop_patience=60),
                       n_classes=11)
    correct = 0
    for wav, cls in test_rows:
        event_patches = np.stack(extract_patches_from_wav(wav))
        pred, _ = predict_event(model, event_patches)
        correct += int(pred == cls)
    elapsed = time.perf_counter() - t0
    accuracy = correct / len(test_rows)
    ok = accuracy >= 0.95 and elapsed < 300.0
    report("toy 3-class event classification (>= 95% in < 5 min)", ok,
           f"accuracy {accuracy:.3f} on {len(test_rows)} events "
           f"({len(train_rows)} train), {elapsed:.0f} s")


def test_classifier_hook_round_trip(toy_dataset, tmp_path):
    """Front-end --classifier-cmd integration via the predictions CSV."""
    train_rows, test_rows = toy_dataset
    patches, labels = [], []
    for wav, cls in train_rows[:30]:
        for patch in extract_patches_from_wav(wav):
            patches.append(patch)
            labels.append(cls)
    model, _ = train(np.stack(patches), labels,
                     TrainConfig(epochs=12, seed=0, batch_size=32), n_classes=11)
    ckpt = tmp_path / "toy.pt"
    save_checkpoint(model, ckpt)

    rng = np.random.default_rng(77)
    spec = tmp_path / "scene.txt"
    spec.write_text(scene_text(rng, seed=9100))
    synth_dir = tmp_path / "synth"
    front_end_cli("synth", str(spec), "--out", str(synth_dir))
    out_dir = tmp_path / "analysis"
    hook = f"{sys.executable} -m seldcrnn.cli classify --model {ckpt}"
    front_end_cli("analyze", str(synth_dir / "scene.wav"),
                  "--out", str(out_dir), "--classifier-cmd", hook)
    est = read_csv(out_dir / "est_events.csv")
    preds = read_csv(out_dir / "predictions.csv")
    ok = (len(preds) == len(est) > 0
          and all(int(row[0]) >= 0 for row in est)
          and all(0.0 < float(p[2]) <= 1.0 for p in preds))
    report("front-end classifier hook consumes predictions.csv", ok,
           f"{len(est)} events classified through the hook")
