#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "types.hpp"

namespace photonic {

inline constexpr int max_symmetric_degree = 8;
inline constexpr int max_regular_degree = 6;

inline std::uint64_t factorial(int n) {
    std::uint64_t f = 1;
    for (int k = 2; k <= n; ++k) f *= static_cast<std::uint64_t>(k);
    return f;
}

class Partition {
public:
    Partition() = default;

    explicit Partition(std::vector<int> parts) : parts_(std::move(parts)) {
        if (parts_.empty()) throw input_error("partition must have at least one part");
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (parts_[i] < 1) throw input_error("partition parts must be positive");
            if (i > 0 && parts_[i] > parts_[i - 1])
                throw input_error("partition parts must be non-increasing");
        }
        n_ = std::accumulate(parts_.begin(), parts_.end(), 0);
    }

    Partition(std::initializer_list<int> parts) : Partition(std::vector<int>(parts)) {}

    // Accepts "2,1", "(2,1)", "2 1" or "2-2-1".
    static Partition parse(const std::string& text) {
        std::vector<int> parts;
        std::string token;
        auto flush = [&] {
            if (token.empty()) return;
            std::size_t used = 0;
            int v = 0;
            try {
                v = std::stoi(token, &used);
            } catch (const std::exception&) {
                throw input_error("cannot parse partition '" + text + "'");
            }
            if (used != token.size()) throw input_error("cannot parse partition '" + text + "'");
            parts.push_back(v);
            token.clear();
        };
        for (char c : text) {
            if (c >= '0' && c <= '9') {
                token.push_back(c);
            } else if (c == ',' || c == ' ' || c == '-' || c == '(' || c == ')' || c == '{' ||
                       c == '}') {
                flush();
            } else {
                throw input_error("cannot parse partition '" + text + "'");
            }
        }
        flush();
        return Partition(std::move(parts));
    }

    int n() const { return n_; }
    int length() const { return static_cast<int>(parts_.size()); }
    const std::vector<int>& parts() const { return parts_; }
    int operator[](int i) const { return parts_[static_cast<std::size_t>(i)]; }

    Partition conjugate() const {
        std::vector<int> c(static_cast<std::size_t>(parts_.front()), 0);
        for (int p : parts_)
            for (int j = 0; j < p; ++j) ++c[static_cast<std::size_t>(j)];
        return Partition(std::move(c));
    }

    bool is_self_conjugate() const { return conjugate() == *this; }

    std::string str() const {
        std::ostringstream os;
        os << '(';
        for (std::size_t i = 0; i < parts_.size(); ++i) os << (i ? "," : "") << parts_[i];
        os << ')';
        return os.str();
    }

    friend bool operator==(const Partition&, const Partition&) = default;
    friend auto operator<=>(const Partition& a, const Partition& b) { return a.parts_ <=> b.parts_; }

private:
    std::vector<int> parts_;
    int n_ = 0;
};

class Permutation {
public:
    Permutation() = default;

    // One-line image of {1..n}.
    explicit Permutation(const std::vector<int>& one_line) {
        image_.reserve(one_line.size());
        for (int v : one_line) image_.push_back(v - 1);
        validate();
    }

    Permutation(std::initializer_list<int> one_line) : Permutation(std::vector<int>(one_line)) {}

    static Permutation from_zero_based(std::vector<int> image) {
        Permutation p;
        p.image_ = std::move(image);
        p.validate();
        return p;
    }

    static Permutation identity(int n) {
        std::vector<int> img(static_cast<std::size_t>(n));
        std::iota(img.begin(), img.end(), 0);
        return from_zero_based(std::move(img));
    }

    // Swap of i and j (1-based).
    static Permutation transposition(int n, int i, int j) {
        Permutation p = identity(n);
        std::swap(p.image_[static_cast<std::size_t>(i - 1)], p.image_[static_cast<std::size_t>(j - 1)]);
        return p;
    }

    int n() const { return static_cast<int>(image_.size()); }

    // 1-based image.
    int operator()(int i) const { return image_[static_cast<std::size_t>(i - 1)] + 1; }
    // 0-based image.
    int at(int i) const { return image_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& zero_based() const { return image_; }

    std::vector<int> one_line() const {
        std::vector<int> v(image_);
        for (int& x : v) ++x;
        return v;
    }

    Permutation inverse() const {
        std::vector<int> inv(image_.size());
        for (std::size_t i = 0; i < image_.size(); ++i) inv[static_cast<std::size_t>(image_[i])] = static_cast<int>(i);
        return from_zero_based(std::move(inv));
    }

    bool is_identity() const {
        for (std::size_t i = 0; i < image_.size(); ++i)
            if (image_[i] != static_cast<int>(i)) return false;
        return true;
    }

    int sign() const {
        std::vector<char> seen(image_.size(), 0);
        int s = 1;
        for (std::size_t i = 0; i < image_.size(); ++i) {
            if (seen[i]) continue;
            std::size_t len = 0;
            for (auto j = i; !seen[j]; j = static_cast<std::size_t>(image_[j])) {
                seen[j] = 1;
                ++len;
            }
            if (len % 2 == 0) s = -s;
        }
        return s;
    }

    Partition cycle_type() const {
        std::vector<char> seen(image_.size(), 0);
        std::vector<int> lengths;
        for (std::size_t i = 0; i < image_.size(); ++i) {
            if (seen[i]) continue;
            int len = 0;
            for (auto j = i; !seen[j]; j = static_cast<std::size_t>(image_[j])) {
                seen[j] = 1;
                ++len;
            }
            lengths.push_back(len);
        }
        std::sort(lengths.rbegin(), lengths.rend());
        return Partition(std::move(lengths));
    }

    std::string str() const {
        std::ostringstream os;
        os << '(';
        for (std::size_t i = 0; i < image_.size(); ++i) os << (i ? "," : "") << image_[i] + 1;
        os << ')';
        return os.str();
    }

    friend bool operator==(const Permutation&, const Permutation&) = default;
    friend auto operator<=>(const Permutation& a, const Permutation& b) { return a.image_ <=> b.image_; }

private:
    void validate() const {
        if (image_.empty()) throw input_error("permutation must act on at least one point");
        std::vector<char> seen(image_.size(), 0);
        for (int v : image_) {
            if (v < 0 || v >= static_cast<int>(image_.size()) || seen[static_cast<std::size_t>(v)])
                throw input_error("permutation image is not a bijection");
            seen[static_cast<std::size_t>(v)] = 1;
        }
    }

    std::vector<int> image_;
};

// (p o q)(i) = p(q(i)); q acts first.
inline Permutation compose(const Permutation& p, const Permutation& q) {
    if (p.n() != q.n()) throw dimension_error("cannot compose permutations of different degree");
    std::vector<int> img(static_cast<std::size_t>(p.n()));
    for (int i = 0; i < p.n(); ++i) img[static_cast<std::size_t>(i)] = p.at(q.at(i));
    return Permutation::from_zero_based(std::move(img));
}

inline Permutation operator*(const Permutation& p, const Permutation& q) { return compose(p, q); }

inline void check_degree(int n, int limit, const char* what) {
    if (n < 1 || n > limit)
        throw size_limit_error(std::string(what) + ": degree " + std::to_string(n) +
                               " outside [1, " + std::to_string(limit) + "]");
}

inline std::vector<Permutation> enumerate_permutations(int n) {
    check_degree(n, max_symmetric_degree, "enumerate_permutations");
    std::vector<int> img(static_cast<std::size_t>(n));
    std::iota(img.begin(), img.end(), 0);
    std::vector<Permutation> out;
    out.reserve(factorial(n));
    do {
        out.push_back(Permutation::from_zero_based(img));
    } while (std::next_permutation(img.begin(), img.end()));
    return out;
}

// Position of p in enumerate_permutations(p.n()).
inline std::size_t permutation_index(const Permutation& p) {
    const int n = p.n();
    std::size_t rank = 0;
    for (int i = 0; i < n; ++i) {
        int smaller = 0;
        for (int j = i + 1; j < n; ++j)
            if (p.at(j) < p.at(i)) ++smaller;
        rank += static_cast<std::size_t>(smaller) * factorial(n - 1 - i);
    }
    return rank;
}

namespace detail {

inline void partitions_rec(int remaining, int max_part, std::vector<int>& cur, std::vector<Partition>& out) {
    if (remaining == 0) {
        out.emplace_back(cur);
        return;
    }
    for (int p = std::min(remaining, max_part); p >= 1; --p) {
        cur.push_back(p);
        partitions_rec(remaining - p, p, cur, out);
        cur.pop_back();
    }
}

// Murnaghan-Nakayama on a beta-set: strips of length mu[k], mu[k+1], ...
inline long long mn_character(std::vector<int>& beta, const std::vector<int>& mu, std::size_t k) {
    if (k == mu.size()) return 1;
    const int r = mu[k];
    long long total = 0;
    for (std::size_t b = 0; b < beta.size(); ++b) {
        const int from = beta[b];
        const int to = from - r;
        if (to < 0) continue;
        if (std::find(beta.begin(), beta.end(), to) != beta.end()) continue;
        int between = 0;
        for (int x : beta)
            if (x > to && x < from) ++between;
        beta[b] = to;
        const long long sub = mn_character(beta, mu, k + 1);
        beta[b] = from;
        total += (between % 2 == 0 ? sub : -sub);
    }
    return total;
}

} // namespace detail

// Reverse-lexicographic: (n) first, (1,...,1) last.
inline std::vector<Partition> partitions_of(int n) {
    check_degree(n, max_symmetric_degree, "partitions_of");
    std::vector<Partition> out;
    std::vector<int> cur;
    detail::partitions_rec(n, n, cur, out);
    return out;
}

inline std::uint64_t irrep_dimension(const Partition& lambda) {
    const int rows = lambda.length();
    const Partition conj = lambda.conjugate();
    // n! / prod(hooks), accumulated as a ratio of exact integers
    std::uint64_t hooks = 1;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < lambda[i]; ++j) hooks *= static_cast<std::uint64_t>(lambda[i] - j - 1 + conj[j] - i);
    return factorial(lambda.n()) / hooks;
}

inline long long character(const Partition& lambda, const Partition& cycle_type) {
    if (lambda.n() != cycle_type.n())
        throw dimension_error("character: partition of " + std::to_string(lambda.n()) +
                              " evaluated on class of S_" + std::to_string(cycle_type.n()));
    const int len = lambda.length();
    std::vector<int> beta(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) beta[static_cast<std::size_t>(i)] = lambda[i] + (len - 1 - i);
    return detail::mn_character(beta, cycle_type.parts(), 0);
}

inline long long character(const Partition& lambda, const Permutation& sigma) {
    if (lambda.n() != sigma.n())
        throw dimension_error("character: partition of " + std::to_string(lambda.n()) +
                              " evaluated on permutation of degree " + std::to_string(sigma.n()));
    return character(lambda, sigma.cycle_type());
}

// Size of the conjugacy class with the given cycle type.
inline std::uint64_t class_size(const Partition& cycle_type) {
    std::uint64_t z = 1;
    const auto& parts = cycle_type.parts();
    for (std::size_t i = 0; i < parts.size();) {
        std::size_t j = i;
        while (j < parts.size() && parts[j] == parts[i]) ++j;
        const auto mult = static_cast<int>(j - i);
        for (int k = 0; k < mult; ++k) z *= static_cast<std::uint64_t>(parts[i]);
        z *= factorial(mult);
        i = j;
    }
    return factorial(cycle_type.n()) / z;
}

struct CharacterTable {
    int n = 0;
    std::vector<Partition> irreps;
    std::vector<Partition> classes;
    std::vector<std::uint64_t> class_sizes;
    std::vector<std::vector<long long>> values;

    long long at(const Partition& lambda, const Partition& cls) const {
        const auto r = std::find(irreps.begin(), irreps.end(), lambda);
        const auto c = std::find(classes.begin(), classes.end(), cls);
        if (r == irreps.end() || c == classes.end()) throw input_error("unknown partition in character table");
        return values[static_cast<std::size_t>(r - irreps.begin())][static_cast<std::size_t>(c - classes.begin())];
    }
};

inline CharacterTable character_table(int n) {
    CharacterTable t;
    t.n = n;
    t.irreps = partitions_of(n);
    t.classes = t.irreps;
    for (const auto& c : t.classes) t.class_sizes.push_back(class_size(c));
    for (const auto& l : t.irreps) {
        std::vector<long long> row;
        for (const auto& c : t.classes) row.push_back(character(l, c));
        t.values.push_back(std::move(row));
    }
    return t;
}

// D(s)_{ab} = 1 iff s o p_b = p_a, indices in enumerate_permutations order.
inline rmatrix regular_representation(const Permutation& sigma) {
    check_degree(sigma.n(), max_regular_degree, "regular_representation");
    const auto perms = enumerate_permutations(sigma.n());
    const auto N = static_cast<index_t>(perms.size());
    rmatrix D = rmatrix::Zero(N, N);
    for (index_t b = 0; b < N; ++b) D(static_cast<index_t>(permutation_index(sigma * perms[static_cast<std::size_t>(b)])), b) = 1.0;
    return D;
}

// Standard Young tableau stored as the (row, column) cell of each entry 1..n.
struct Tableau {
    std::vector<int> row;
    std::vector<int> col;

    int content(int value) const {
        return col[static_cast<std::size_t>(value - 1)] - row[static_cast<std::size_t>(value - 1)];
    }
};

inline std::vector<Tableau> standard_tableaux(const Partition& lambda) {
    const int n = lambda.n();
    std::vector<Tableau> out;
    std::vector<int> filled(static_cast<std::size_t>(lambda.length()), 0);
    Tableau cur;
    cur.row.assign(static_cast<std::size_t>(n), 0);
    cur.col.assign(static_cast<std::size_t>(n), 0);
    auto rec = [&](auto&& self, int value) -> void {
        if (value > n) {
            out.push_back(cur);
            return;
        }
        for (int r = 0; r < lambda.length(); ++r) {
            const auto ru = static_cast<std::size_t>(r);
            if (filled[ru] >= lambda[r]) continue;
            if (r > 0 && filled[ru - 1] <= filled[ru]) continue;
            cur.row[static_cast<std::size_t>(value - 1)] = r;
            cur.col[static_cast<std::size_t>(value - 1)] = filled[ru];
            ++filled[ru];
            self(self, value + 1);
            --filled[ru];
        }
    };
    rec(rec, 1);
    return out;
}

// Irreducible representation in Young's orthogonal form.
class YoungRepresentation {
public:
    explicit YoungRepresentation(Partition lambda) : lambda_(std::move(lambda)), tableaux_(standard_tableaux(lambda_)) {
        const int n = lambda_.n();
        const auto d = static_cast<index_t>(tableaux_.size());
        for (int k = 1; k < n; ++k) {
            rmatrix g = rmatrix::Zero(d, d);
            for (index_t t = 0; t < d; ++t) {
                const Tableau& T = tableaux_[static_cast<std::size_t>(t)];
                const auto a = static_cast<std::size_t>(k - 1);
                const auto b = static_cast<std::size_t>(k);
                if (T.row[a] == T.row[b]) {
                    g(t, t) = 1.0;
                } else if (T.col[a] == T.col[b]) {
                    g(t, t) = -1.0;
                } else {
                    const double r = static_cast<double>(T.content(k + 1) - T.content(k));
                    Tableau swapped = T;
                    std::swap(swapped.row[a], swapped.row[b]);
                    std::swap(swapped.col[a], swapped.col[b]);
                    const index_t s = find(swapped);
                    g(t, t) = 1.0 / r;
                    g(s, t) = std::sqrt(1.0 - 1.0 / (r * r));
                }
            }
            generators_.push_back(std::move(g));
        }
    }

    const Partition& partition() const { return lambda_; }
    index_t dimension() const { return static_cast<index_t>(tableaux_.size()); }
    const std::vector<Tableau>& tableaux() const { return tableaux_; }

    // Image of the adjacent transposition (k, k+1), 1 <= k < n.
    const rmatrix& generator(int k) const { return generators_[static_cast<std::size_t>(k - 1)]; }

    rmatrix operator()(const Permutation& sigma) const {
        if (sigma.n() != lambda_.n()) throw dimension_error("Young representation degree mismatch");
        rmatrix R = rmatrix::Identity(dimension(), dimension());
        std::vector<int> img = sigma.zero_based();
        // peel descents from the right: s = s' o s_k, so Y(s) = Y(s') Y(s_k)
        for (;;) {
            int k = -1;
            for (std::size_t i = 0; i + 1 < img.size(); ++i)
                if (img[i] > img[i + 1]) {
                    k = static_cast<int>(i);
                    break;
                }
            if (k < 0) break;
            std::swap(img[static_cast<std::size_t>(k)], img[static_cast<std::size_t>(k) + 1]);
            R = generators_[static_cast<std::size_t>(k)] * R;
        }
        return R;
    }

private:
    index_t find(const Tableau& t) const {
        for (std::size_t i = 0; i < tableaux_.size(); ++i)
            if (tableaux_[i].row == t.row && tableaux_[i].col == t.col) return static_cast<index_t>(i);
        throw numeric_error("swapped tableau is not standard");
    }

    Partition lambda_;
    std::vector<Tableau> tableaux_;
    std::vector<rmatrix> generators_;
};

struct IrrepBlock {
    Partition partition;
    index_t dim = 0;
    index_t offset = 0;
    index_t size = 0;
};

// (n) first, (1^n) last. Between them: partitions larger than their conjugate
// (reverse-lex), then self-conjugate ones, then the conjugates of the first group
// in matching order.
inline std::vector<Partition> block_order(int n) {
    check_degree(n, max_symmetric_degree, "block_order");
    const auto all = partitions_of(n);
    if (n == 1) return all;
    const Partition trivial({n});
    const Partition sign = trivial.conjugate();
    std::vector<Partition> upper, self;
    for (const auto& p : all) {
        if (p == trivial || p == sign) continue;
        const Partition c = p.conjugate();
        if (c == p) {
            self.push_back(p);
        } else if (p > c) {
            upper.push_back(p);
        }
    }
    std::vector<Partition> out{trivial};
    out.insert(out.end(), upper.begin(), upper.end());
    out.insert(out.end(), self.begin(), self.end());
    for (const auto& p : upper) out.push_back(p.conjugate());
    out.push_back(sign);
    return out;
}

inline std::vector<IrrepBlock> block_layout(int n) {
    std::vector<IrrepBlock> out;
    index_t offset = 0;
    for (const auto& p : block_order(n)) {
        const auto d = static_cast<index_t>(irrep_dimension(p));
        out.push_back({p, d, offset, d * d});
        offset += d * d;
    }
    return out;
}

// Real orthogonal Q with Q^T D(s) Q = blockdiag over block_layout of (I_d (x) Y_lambda(s)).
inline rmatrix symmetry_adapter(int n) {
    check_degree(n, max_regular_degree, "symmetry_adapter");
    const auto perms = enumerate_permutations(n);
    const auto N = static_cast<index_t>(perms.size());
    const double nf = static_cast<double>(N);
    rmatrix Q = rmatrix::Zero(N, N);
    for (const auto& blk : block_layout(n)) {
        const YoungRepresentation Y(blk.partition);
        const double scale = std::sqrt(static_cast<double>(blk.dim) / nf);
        for (index_t mu = 0; mu < N; ++mu) {
            const rmatrix y = Y(perms[static_cast<std::size_t>(mu)]);
            for (index_t j = 0; j < blk.dim; ++j)
                for (index_t i = 0; i < blk.dim; ++i) Q(mu, blk.offset + j * blk.dim + i) = scale * y(i, j);
        }
    }
    return Q;
}

} // namespace photonic
