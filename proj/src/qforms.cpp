// Implementation of the quadratic-form module.
#include "merolift/qforms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

namespace merolift {
namespace {

using i64 = long long;
using i128 = __int128_t;

i64 mod(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

i64 mulmod(i64 a, i64 b, i64 m) { return (i64)((i128)a * b % m); }

i64 powmod(i64 a, i64 e, i64 m) {
    i64 r = 1 % m;
    a = mod(a, m);
    while (e > 0) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

i64 invmod(i64 a, i64 m) { // m need not be prime; requires gcd(a,m)=1
    i64 g = m, x = 0, x1 = 1, a1 = mod(a, m);
    while (a1 != 0) {
        i64 q = g / a1;
        g -= q * a1; std::swap(g, a1);
        x -= q * x1; std::swap(x, x1);
    }
    return mod(x, m);
}

/// Tonelli--Shanks: square root of a (a unit) modulo an odd prime p.
/// Returns -1 when a is a non-residue.
i64 sqrtModPrime(i64 a, i64 p) {
    a = mod(a, p);
    if (a == 0) return 0;
    if (powmod(a, (p - 1) / 2, p) != 1) return -1;
    if (p % 4 == 3) return powmod(a, (p + 1) / 4, p);
    // Factor p-1 = q * 2^s with q odd.
    i64 q = p - 1, s = 0;
    while (q % 2 == 0) { q /= 2; ++s; }
    i64 zNR = 2;
    while (powmod(zNR, (p - 1) / 2, p) != p - 1) ++zNR;
    i64 mExp = s;
    i64 cc = powmod(zNR, q, p);
    i64 t = powmod(a, q, p);
    i64 r = powmod(a, (q + 1) / 2, p);
    while (t != 1) {
        i64 t2 = t, i = 0;
        while (t2 != 1) { t2 = mulmod(t2, t2, p); ++i; }
        i64 bPow = powmod(cc, i64(1) << (mExp - i - 1), p);
        mExp = i;
        cc = mulmod(bPow, bPow, p);
        t = mulmod(t, cc, p);
        r = mulmod(r, bPow, p);
    }
    return r;
}

/// All solutions of x^2 == a (mod p^e), p prime.  Handles non-unit a by
/// valuation reduction; small moduli fall back to a direct scan.
std::vector<i64> sqrtModPrimePower(i64 a, i64 p, int e) {
    i64 pe = 1;
    for (int i = 0; i < e; ++i) pe *= p;
    a = mod(a, pe);
    if (pe <= 4096) {
        std::vector<i64> out;
        for (i64 x = 0; x < pe; ++x)
            if (mulmod(x, x, pe) == a) out.push_back(x);
        return out;
    }
    if (a == 0) {
        // x^2 == 0 (mod p^e): x == 0 (mod p^ceil(e/2)).
        i64 step = 1;
        for (int i = 0; i < (e + 1) / 2; ++i) step *= p;
        std::vector<i64> out;
        for (i64 x = 0; x < pe; x += step) out.push_back(x);
        return out;
    }
    // Strip the valuation: a = p^j * a' with p not dividing a'.
    int j = 0;
    i64 ap = a;
    while (ap % p == 0) { ap /= p; ++j; }
    if (j > 0) {
        if (j % 2 != 0) return {};
        int half = j / 2;
        i64 phalf = 1;
        for (int i = 0; i < half; ++i) phalf *= p;
        auto inner = sqrtModPrimePower(ap, p, e - j);
        i64 peMinusJ = pe;
        for (int i = 0; i < j; ++i) peMinusJ /= p;
        std::set<i64> out;
        for (i64 z : inner)
            for (i64 s = 0; s < phalf; ++s)
                out.insert(mod(phalf * (z + s * peMinusJ), pe));
        return {out.begin(), out.end()};
    }
    if (p == 2) {
        // Unit square roots mod 2^e (e >= 3 here): exist iff a == 1 (mod 8);
        // lift from x == 1 by correcting one bit at a time.
        if (a % 8 != 1) return {};
        i64 x = 1;
        for (int k = 3; k < e; ++k) {
            i64 mk1 = i64(1) << (k + 1);
            if (mod(mulmod(x, x, mk1) - a, mk1) != 0) x += i64(1) << (k - 1);
        }
        std::set<i64> out{mod(x, pe), mod(-x, pe), mod(x + pe / 2, pe),
                          mod(-x + pe / 2, pe)};
        return {out.begin(), out.end()};
    }
    i64 x = sqrtModPrime(a, p);
    if (x < 0) return {};
    // Hensel lift to p^e.
    i64 pk = p;
    while (pk < pe) {
        i64 pk2 = std::min((i128)pk * pk > (i128)pe ? pe : pk * pk, pe);
        i64 fx = mod(mulmod(x, x, pk2) - mod(a, pk2), pk2);
        i64 corr = mulmod(fx / pk % (pk2 / pk), invmod(mod(2 * x, pk2 / pk), pk2 / pk), pk2 / pk);
        x = mod(x - corr * pk, pk2);
        pk = pk2;
    }
    return {x, pe - x};
}

/// All solutions of x^2 == a (mod M), M >= 1, by CRT over prime powers.
std::vector<i64> sqrtModM(i64 a, i64 M) {
    if (M == 1) return {0};
    a = mod(a, M);
    std::vector<std::pair<i64, int>> fac;
    i64 m = M;
    for (i64 p = 2; p * p <= m; p += (p == 2 ? 1 : 2)) {
        if (m % p == 0) {
            int e = 0;
            while (m % p == 0) { m /= p; ++e; }
            fac.push_back({p, e});
        }
    }
    if (m > 1) fac.push_back({m, 1});
    std::vector<i64> sols{0};
    i64 mAcc = 1;
    for (auto [p, e] : fac) {
        i64 pe = 1;
        for (int i = 0; i < e; ++i) pe *= p;
        auto part = sqrtModPrimePower(a, p, e);
        if (part.empty()) return {};
        std::vector<i64> next;
        next.reserve(sols.size() * part.size());
        i64 mNew = mAcc * pe;
        // CRT: x == s (mod mAcc), x == t (mod pe).
        i64 inv = invmod(mAcc % pe, pe);
        for (i64 s : sols)
            for (i64 t : part) {
                i64 k = mulmod(mod(t - s, pe), inv, pe);
                next.push_back(mod(s + mAcc * k, mNew));
            }
        sols = std::move(next);
        mAcc = mNew;
    }
    std::sort(sols.begin(), sols.end());
    return sols;
}

bool isReduced(const QForm& q) {
    if (!(std::llabs(q.B) <= q.A && q.A <= q.C)) return false;
    if ((std::llabs(q.B) == q.A || q.A == q.C) && q.B < 0) return false;
    return true;
}

} // namespace

long long discriminant(const QForm& q) { return q.B * q.B - 4 * q.A * q.C; }

Complex qEval(const QForm& q, Complex z) {
    return (double)q.A * z * z + (double)q.B * z + (double)q.C;
}

Complex qEval(const QForm& q, const UhpPoint& z) { return qEval(q, z.toComplex()); }

double qZ(const QForm& q, const UhpPoint& z) {
    double zz = z.u * z.u + z.v * z.v;
    return ((double)q.A * zz + (double)q.B * z.u + (double)q.C) / z.v;
}

UhpPoint cmPoint(const QForm& q) {
    long long D = discriminant(q);
    if (q.A <= 0 || D >= 0) {
        throw ConfigError("cmPoint requires A > 0 and negative discriminant");
    }
    return UhpPoint(-(double)q.B / (2.0 * q.A),
                    std::sqrt((double)-D) / (2.0 * q.A));
}

QForm gamma0Act(const Mat2R& g, const QForm& q, long long N) {
    if (!g.isIntegral()) throw ConfigError("gamma0Act requires integral gamma");
    i64 a = llround(g.a), b = llround(g.b), c = llround(g.c), d = llround(g.d);
    if (a * d - b * c != 1) throw ConfigError("gamma0Act requires determinant 1");
    if (N > 0 && c % N != 0) throw ConfigError("gamma0Act: gamma not in Gamma_0(N)");
    // (gamma.Q)(X,Y) = Q(dX - bY, -cX + aY).  This is the unique convention
    // (substituting the antidiagonal conjugate-transpose) that is a LEFT
    // action and intertwines cmPoint with the Moebius action of gamma.
    QForm r;
    r.A = q.A * d * d - q.B * d * c + q.C * c * c;
    r.B = -2 * q.A * b * d + q.B * (a * d + b * c) - 2 * q.C * a * c;
    r.C = q.A * b * b - q.B * a * b + q.C * a * a;
    return r;
}

std::string ClassData::toJson() const {
    nlohmann::json j;
    j["N"] = N;
    j["beta"] = beta;
    j["D"] = D;
    j["classes"] = nlohmann::json::array();
    for (size_t i = 0; i < reps.size(); ++i) {
        j["classes"].push_back({{"A", reps[i].A},
                                {"B", reps[i].B},
                                {"C", reps[i].C},
                                {"stab", stabilizerOrders[i]}});
    }
    return j.dump();
}

ClassData ClassData::fromJson(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ClassData cd;
    cd.N = j.at("N").get<long long>();
    cd.beta = j.at("beta").get<long long>();
    cd.D = j.at("D").get<long long>();
    for (const auto& cls : j.at("classes")) {
        cd.reps.push_back({cls.at("A").get<long long>(),
                           cls.at("B").get<long long>(),
                           cls.at("C").get<long long>()});
        cd.stabilizerOrders.push_back(cls.at("stab").get<int>());
    }
    return cd;
}

ClassData classRepresentatives(long long N, long long beta, long long D) {
    if (N < 1) throw ConfigError("level N must be positive");
    if (D >= 0) throw ConfigError("discriminant must be negative");
    if (mod(beta * beta - D, 4 * N) != 0) {
        throw ConfigError("congruence failure: D != beta^2 (mod 4N)");
    }
    ClassData cd;
    cd.N = N;
    cd.beta = mod(beta, 2 * N);
    cd.D = D;
    if (N == 1) {
        // Classical reduced forms |B| <= A <= C, B >= 0 on the boundary.
        for (i64 A = 1; 3 * A * A <= -D; ++A) {
            for (i64 B = -A; B <= A; ++B) {
                i64 num = B * B - D;
                if (num % (4 * A) != 0) continue;
                i64 C = num / (4 * A);
                QForm q{A, B, C};
                if (isReduced(q)) {
                    cd.reps.push_back(q);
                    cd.stabilizerOrders.push_back(automorphOrder(q, 1));
                }
            }
        }
        std::sort(cd.reps.begin(), cd.reps.end());
        return cd;
    }
    // General (small) N: collect level-valid forms in a coefficient box and
    // merge Gamma_0(N)-equivalent ones by breadth-first orbit search.
    i64 boxA = N * (-D + 4);
    std::set<QForm> box;
    for (i64 A = N; A <= boxA; A += N) {
        for (i64 B = mod(beta, 2 * N) - ((2 * A + 2 * N) / (2 * N)) * 2 * N;
             B <= 2 * A + 2 * N; B += 2 * N) {
            i64 num = B * B - D;
            if (num % (4 * A) != 0) continue;
            box.insert({A, B, num / (4 * A)});
        }
    }
    // Generators of Gamma_0(N) used for the orbit search (entry-bounded).
    std::vector<Mat2R> gens;
    gens.push_back(Mat2R(1, 1, 0, 1));
    gens.push_back(Mat2R(1, -1, 0, 1));
    for (i64 c = -3; c <= 3; ++c) {
        if (c % N != 0) continue;
        for (i64 a = -3; a <= 3; ++a)
            for (i64 b = -3; b <= 3; ++b)
                for (i64 d = -3; d <= 3; ++d)
                    if (a * d - b * c == 1 && !(a == 1 && b == 0 && c == 0 && d == 1))
                        gens.push_back(Mat2R((double)a, (double)b, (double)c, (double)d));
    }
    std::set<QForm> seen;
    for (const QForm& q0 : box) {
        if (seen.count(q0)) continue;
        // BFS the orbit of q0 inside a generous box.
        std::set<QForm> orbit{q0};
        std::vector<QForm> frontier{q0};
        while (!frontier.empty()) {
            std::vector<QForm> next;
            for (const QForm& q : frontier) {
                for (const Mat2R& g : gens) {
                    QForm r = gamma0Act(g, q, N);
                    if (r.A <= 0 || r.A > 4 * boxA || std::llabs(r.B) > 8 * boxA)
                        continue;
                    if (orbit.insert(r).second) next.push_back(r);
                }
            }
            frontier = std::move(next);
        }
        QForm rep = *orbit.begin();
        for (const QForm& q : orbit) seen.insert(q);
        cd.reps.push_back(rep);
        cd.stabilizerOrders.push_back(automorphOrder(rep, N));
    }
    std::sort(cd.reps.begin(), cd.reps.end());
    return cd;
}

int automorphOrder(const QForm& q, long long N) {
    // Exhaustive search over integral matrices with entries bounded by 2:
    // nontrivial automorphs only occur for D = -3, -4 where this is complete.
    int count = 0;
    for (i64 a = -2; a <= 2; ++a)
        for (i64 b = -2; b <= 2; ++b)
            for (i64 c = -2; c <= 2; ++c) {
                if (N > 0 && c % N != 0) continue;
                for (i64 d = -2; d <= 2; ++d) {
                    if (a * d - b * c != 1) continue;
                    Mat2R g((double)a, (double)b, (double)c, (double)d);
                    if (gamma0Act(g, q, N) == q) ++count;
                }
            }
    return count / 2; // modulo {+-I}
}

std::array<std::array<double, 2>, 2> latticeVector(const QForm& q, long long N) {
    double s = std::sqrt((double)N);
    return {{{q.B / (2.0 * s), q.C / s}, {-q.A / s, -q.B / (2.0 * s)}}};
}

std::vector<QForm> enumerateByHeight(long long N, long long beta, long long D,
                                     const UhpPoint& z, double Tmax) {
    if (Tmax < 1.0) throw ConfigError("enumerateByHeight requires Tmax >= 1");
    if (mod(beta * beta - D, 4 * N) != 0) {
        throw ConfigError("congruence failure: D != beta^2 (mod 4N)");
    }
    const double M = std::sqrt((double)-D) * Tmax; // bound on Q_z
    const double v = z.v, u = z.u;
    const double eps = 1e-9 * std::max(1.0, M);
    std::vector<QForm> out;
    i64 betaR = mod(beta, 2 * N);
    for (i64 A = N;; A += N) {
        // Discriminant of the B-quadratic: 4A(Mv - A v^2) + D.
        double discB = 4.0 * A * (M * v - A * v * v) + D;
        if (4.0 * A * M * v + D < -eps && A * v > M) break;
        if (discB < 0) {
            if (A * v > M) break; // beyond the A-range entirely
            continue;
        }
        double root = std::sqrt(discB);
        double bLo = -2.0 * A * u - root, bHi = -2.0 * A * u + root;
        i64 M4A = 4 * A;
        for (i64 r : sqrtModM(mod(D, M4A), M4A)) {
            if (mod(r - betaR, 2 * N) != 0) continue;
            i64 bStart = (i64)std::ceil((bLo - r) / (double)M4A) * M4A + r;
            for (i64 B = bStart; (double)B <= bHi + 0.5; B += M4A) {
                if ((double)B < bLo - 0.5) continue;
                i64 num = B * B - D;
                if (num % M4A != 0) continue; // paranoia; r guarantees this
                QForm q{A, B, num / M4A};
                if (qZ(q, z) <= M + eps) out.push_back(q);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<QForm> enumerateByHeightBox(long long N, long long beta,
                                        long long D, const UhpPoint& z,
                                        double Tmax, long long box) {
    const double M = std::sqrt((double)-D) * Tmax;
    const double eps = 1e-9 * std::max(1.0, M);
    std::vector<QForm> out;
    for (i64 A = N; A <= box; A += N) {
        if (A % N != 0) continue;
        for (i64 B = -box; B <= box; ++B) {
            if (mod(B - beta, 2 * N) != 0) continue;
            i64 num = B * B - D;
            if (num % (4 * A) != 0) continue;
            QForm q{A, B, num / (4 * A)};
            if (qZ(q, z) <= M + eps) out.push_back(q);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace merolift
