"""Regenerates the sample amplitude tables in this directory."""
import cmath
import math
import random

HEADER = "theta_rad A_re A_im B_re B_im C_re C_im D_re D_im E_re E_im F_re F_im"


def invariant(a, b, c, d, e, f):
    big_b = b - c + d - a
    big_c = b + c - d - a
    big_d = c + d - b - a
    big_a = a + (big_b + big_c + big_d) / 4
    return [big_a, big_b, big_c, big_d, e, f]


def write(path, rows, comment, identical):
    with open(path, "w") as out:
        out.write(f"# {comment}\n")
        if identical:
            out.write("# identical_nucleons = true\n")
        out.write(HEADER + "\n")
        for theta, amps in rows:
            cols = [repr(theta)]
            for z in amps:
                cols += [repr(z.real), repr(z.imag)]
            out.write(" ".join(cols) + "\n")


def identical_rows(f_scale):
    rows = []
    for k in range(37):
        th = math.pi * k / 36
        cs, sn = math.cos(th), math.sin(th)
        a = complex(1 + 0.3 * cs * cs, 0.2)
        b = 0.4 * cs + 0j
        c = 0.25 * cs * complex(1, 0.1)
        d = -0.3 * cs * sn + 0j
        e = complex(0.5 + 0.1 * sn, -0.05)
        f = f_scale * sn
        rows.append((th, invariant(a, b, c, d, e, f)))
    return rows


write("pp_symmetric.amp", identical_rows(0.0),
      "identical-nucleon model table, symmetric about pi/2", True)
write("pp_f_nonzero.amp", identical_rows(0.05),
      "same model with a nonzero F term; fails the identical-nucleon checks", True)

rng = random.Random(7)
rows = []
for k in range(19):
    th = math.pi * k / 18
    rows.append((th, [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(6)]))
write("np_random.amp", rows, "random amplitudes, distinguishable nucleons", False)

write("constant_a.amp", [(math.pi / 2, [1 + 0j] + [0j] * 5)],
      "f = identity at a single angle", False)
