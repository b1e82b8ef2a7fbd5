"""Independent oracle for the L2 error curves eps_d, d = 0..32, T = 1.

Route: Hankel moment matrix solved in 250-digit arithmetic (mpmath), which
shares nothing with the library's Stieltjes/Gauss pipeline. Writes
tests/fixtures/l2_error_curves.json. Re-run only to regenerate the fixture.

  PureExp(1):          m_k = k!,            b_k = int w^k e^{-w} e^{iw} = k!/(1-i)^{k+1}
  StretchedExp(1,1/2): m_k = 2 Gamma(2k+2), b_k by rotating u = sqrt(w) onto u = r e^{i pi/4}
"""
import json
import pathlib

import mpmath as mp

mp.mp.dps = 250
D = 32


def curve(mom, b):
    out = []
    for d in range(D + 1):
        G = mp.matrix(d + 1, d + 1)
        for j in range(d + 1):
            for k in range(d + 1):
                G[j, k] = mom[j + k]
        rhs = mp.matrix([b[k] for k in range(d + 1)])
        c = mp.lu_solve(G, rhs)
        e2 = mom[0] - sum(mp.conj(rhs[k]) * c[k] for k in range(d + 1)).real
        out.append(mp.sqrt(e2))
    return out


def pure_exp():
    mom = [mp.factorial(k) for k in range(2 * D + 2)]
    b = [mp.factorial(k) / mp.mpc(1, -1) ** (k + 1) for k in range(D + 1)]
    return curve(mom, b)


def stretched_half():
    mom = [2 * mp.gamma(2 * k + 2) for k in range(2 * D + 2)]
    w = mp.exp(1j * mp.pi / 4)

    def bk(k):
        f = lambda r: r ** (2 * k + 1) * mp.exp(-r * r) * mp.exp(-r * w)
        return 2 * w ** (2 * k + 2) * mp.quad(f, [0, 2, 5, 10, 20, 40])

    return curve(mom, [bk(k) for k in range(D + 1)])


def main():
    pe, se = pure_exp(), stretched_half()
    data = {
        "T": 1.0,
        "degrees": list(range(D + 1)),
        "PureExp(r=1)": [mp.nstr(v, 20) for v in pe],
        "StretchedExp(r=1,q=0.5)": [mp.nstr(v, 20) for v in se],
        "F_PureExp": mp.nstr(pe[2] / pe[32], 20),
        "F_StretchedExp": mp.nstr(se[2] / se[32], 20),
    }
    out = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "l2_error_curves.json"
    out.write_text(json.dumps(data, indent=1) + "\n")
    print(out, data["F_PureExp"], data["F_StretchedExp"])


if __name__ == "__main__":
    main()
