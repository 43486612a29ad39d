"""Dry run of the training-efficacy and ordering experiments at acceptance
scale: reduced dataset (4 speeds x 8 SNRs x 100 subframes), 20-epoch
training, then BLER/EVM sweeps on held-out data.  Prints every number the
acceptance thresholds depend on."""

import dataclasses
import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from cv2xsim.config import RunConfig
from cv2xsim.dataset import iter_records
from cv2xsim.nn.checkpoint import save_model
from cv2xsim.nn.model import predict
from cv2xsim.simulate import dataset_paths, generate_dataset, run_eval, train_model

OUT = os.environ.get("DRYRUN_OUT", os.path.join("runs", "accept"))


def main():
    t0 = time.time()
    train_cfg = dataclasses.replace(RunConfig(), n_subframes=100, master_seed=0)
    data_dir = os.path.join(OUT, "data")
    if not all(os.path.exists(p) for p in dataset_paths(train_cfg, data_dir)):
        print("[gen] training dataset ...", flush=True)
        generate_dataset(train_cfg, data_dir)
    print(f"[gen] done at {time.time()-t0:.0f}s", flush=True)

    model_path = os.path.join(OUT, "model.cvxm")
    model, history = train_model(train_cfg, data_dir, model_path)
    print(f"[train] loss history: {[f'{h:.5f}' for h in history]}", flush=True)
    print(f"[train] done at {time.time()-t0:.0f}s", flush=True)

    # per-speed MSE of prediction vs raw noisy input, over the full set
    for speed in train_cfg.speeds_kmph:
        mse_pred, mse_noisy, n = 0.0, 0.0, 0
        for snr in train_cfg.snr_db:
            path = dataset_paths(train_cfg, data_dir)[0]
            from cv2xsim.dataset import dataset_filename

            path = os.path.join(data_dir, dataset_filename(speed, snr))
            recs = [rec for _, rec in iter_records(path, want_rx=False)]
            stacked = np.stack([rec.h_noisy for rec in recs])
            pred = predict(model, stacked)
            for i, rec in enumerate(recs):
                mse_pred += np.mean(np.abs(pred[i] - rec.h_perf) ** 2)
                mse_noisy += np.mean(np.abs(rec.h_noisy - rec.h_perf) ** 2)
                n += 1
        print(
            f"[mse] speed {speed:g}: pred {mse_pred/n:.5f}  noisy {mse_noisy/n:.5f}  "
            f"ratio {mse_pred/mse_noisy:.3f}",
            flush=True,
        )
    print(f"[mse] done at {time.time()-t0:.0f}s", flush=True)

    # held-out ordering sweeps (different master seed)
    eval400 = dataclasses.replace(
        RunConfig(), speeds_kmph=(400.0,), snr_db=(4.0, 5.0), n_subframes=500, master_seed=1
    )
    d400 = os.path.join(OUT, "eval400")
    if not all(os.path.exists(p) for p in dataset_paths(eval400, d400)):
        print("[gen] 400 km/h eval dataset ...", flush=True)
        generate_dataset(eval400, d400)
    rows = run_eval(eval400, d400, model=model)
    for r in rows:
        print(f"[eval400] {r.to_csv_row()}", flush=True)

    eval100 = dataclasses.replace(
        RunConfig(),
        speeds_kmph=(100.0,),
        snr_db=tuple(float(s) for s in range(-2, 6)),
        n_subframes=500,
        master_seed=1,
    )
    d100 = os.path.join(OUT, "eval100")
    if not all(os.path.exists(p) for p in dataset_paths(eval100, d100)):
        print("[gen] 100 km/h eval dataset ...", flush=True)
        generate_dataset(eval100, d100)
    rows = run_eval(eval100, d100, model=model)
    for r in rows:
        print(f"[eval100] {r.to_csv_row()}", flush=True)
    print(f"[all] done at {time.time()-t0:.0f}s", flush=True)


if __name__ == "__main__":
    main()
