import subprocess
import sys

import pytest

HEADER = ("t,v_src_a,v_src_b,v_src_c,v_pcc_al,v_pcc_be,"
          "i_inv_al,i_inv_be,i_inv_norm_pu,rst,ctr_ovs_w")


def make_synthetic_trace(path, n=400, rst_rows=(), i_base=21.2132034,
                         header=HEADER, sag_rows=None):
    """Small schema-conformant trace with a 60 Hz pattern, optional reset
    pulses, and an optional source-amplitude sag over a row range."""
    import math
    dt = 1.0 / 105000.0
    lines = [header]
    for k in range(n):
        t = k * dt
        th = 2 * math.pi * 60.0 * t
        scale = 0.1 if sag_rows and sag_rows[0] <= k < sag_rows[1] else 1.0
        va, vb, vc = (scale * 179.6 * math.cos(th + p)
                      for p in (0.0, -2.0943951, 2.0943951))
        ia = i_base * math.cos(th)
        ib = i_base * math.sin(th)
        rst = 1 if k in rst_rows else 0
        ctr = (k % 15) + 1
        cells = [f"{v:.9g}" for v in
                 (t, va, vb, vc, va, vb, ia, ib, math.hypot(ia, ib) / i_base)]
        lines.append(",".join(cells + [str(rst), str(ctr)]))
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture()
def synthetic_pair(tmp_path):
    d = make_synthetic_trace(tmp_path / "case_dsdu.csv", rst_rows=())
    p = make_synthetic_trace(tmp_path / "case_proposed.csv", rst_rows=(120, 121, 260))
    return {"dsdu": d, "proposed": p}


@pytest.fixture(scope="session")
def sym_sag_traces(tmp_path_factory):
    """Real both-mode traces produced through the simulator's public CLI."""
    out = tmp_path_factory.mktemp("sag")
    cmd = [sys.executable, "-m", "carriershift.cli", "run",
           "--scenario", "sym_sag_90", "--mode", "both", "--out", str(out)]
    proc = subprocess.run(cmd, capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stderr
    return {"dsdu": str(out / "sym_sag_90_dsdu.csv"),
            "proposed": str(out / "sym_sag_90_proposed.csv")}
