#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

namespace msnow {

using Bits = std::vector<std::uint8_t>;
using Rational = boost::rational<std::int64_t>;

class PnError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Bits bits_from_string(std::string_view s);
std::string bits_to_string(const Bits& b);

// Feedback coefficients c_1..c_n of a_i = sum c_k a_{i-k} (mod 2).
struct Polynomial {
    int degree = 0;
    std::vector<int> taps;  // ascending, each in [1, degree], always contains degree

    static Polynomial from_taps(int degree, std::vector<int> taps);
    // Characteristic polynomial given by its exponents, e.g. {3, 1, 0} for x^3 + x + 1.
    static Polynomial from_exponents(std::vector<int> exponents);
    std::string to_string() const;
};

struct Seed {
    Bits bits;
    static Seed from_string(std::string_view s);
};

// How register contents map onto the output sequence. The frozen default
// emits the seed bits first (a_0..a_{n-1} = seed, left to right) and uses the
// taps as written. Other combinations exist only so the calibration search can
// show they do not reproduce the printed sets.
struct LfsrConvention {
    bool reverse_seed = false;  // load the seed right to left
    bool reciprocal = false;    // use c_{n-k} instead of c_k
    bool reverse_output = false;

    bool operator==(const LfsrConvention&) const = default;
    std::string to_string() const;
    static std::vector<LfsrConvention> all();
};

struct MSequence {
    Bits bits;
    Polynomial poly;
    Seed seed;

    int degree() const { return poly.degree; }
    std::size_t length() const { return bits.size(); }
};

// Runs the register until it returns to its start state; the cycle length.
std::int64_t lfsr_period(const Polynomial& poly, const Seed& seed);

MSequence generate_msequence(const Polynomial& poly, const Seed& seed,
                             const LfsrConvention& conv = {});

// A primitive polynomial for each degree in [2, 16].
Polynomial default_primitive(int n);

Bits decimate(const Bits& u, std::int64_t q);
MSequence decimate(const MSequence& u, std::int64_t q);

struct Validation {
    bool ok = true;
    std::string reason;
    explicit operator bool() const { return ok; }
};

Validation validate_preferred_pair(int n, std::int64_t q, int k);

// Smallest valid (q, k) for degree n, if one exists.
std::optional<std::pair<std::int64_t, int>> smallest_preferred_q(int n);

struct PreferredPair {
    MSequence u;
    MSequence v;
    std::int64_t q = 0;
    int k = 0;
};

// v taken from its own register. Checked to be a cyclic shift of decimate(u, q).
PreferredPair make_preferred_pair(const MSequence& u, const MSequence& v, std::int64_t q, int k);
// v = decimate(u, q) directly.
PreferredPair make_preferred_pair(const MSequence& u, std::int64_t q, int k);

struct PnSequence {
    Bits bits;
    int index = 0;

    std::size_t length() const { return bits.size(); }
    int weight() const;
};

struct PnSet {
    std::vector<PnSequence> sequences;
    PreferredPair pair;
    std::string label;

    std::size_t size() const { return sequences.size(); }
    const PnSequence& operator[](std::size_t i) const { return sequences[i]; }
};

Bits rotate_left(const Bits& v, std::size_t s);
Bits xor_bits(const Bits& a, const Bits& b);

PnSet generate_gold_set(const PreferredPair& pair, std::string label);

// The two n = 3 families used on odd and even subcarriers.
PnSet n3_pn_set(std::string_view seed1, std::string_view seed2, std::string label);
PnSet pns1();
PnSet pns2();

// Builds the set for degree n from two register seeds using the default
// polynomial for u and a decimated partner for v. For n = 3 this is the
// x^3+x+1 / x^3+x^2+1 pair.
PnSet gold_set_for_degree(int n, std::string_view seed1, std::string_view seed2, std::string label);

std::int64_t t_of_n(int n);

// Unnormalized periodic correlation sum over n of a'_n b'_{n-tau}, a' = 1 - 2a.
std::int64_t crosscorrelation_raw(const Bits& a, const Bits& b, std::int64_t tau);
Rational crosscorrelation(const Bits& a, const Bits& b, std::int64_t tau);
Rational autocorrelation(const Bits& a, std::int64_t tau);

bool is_balanced(const Bits& a);
// Cyclic runs: histogram length -> count.
std::map<int, int> run_length_histogram(const Bits& a);
bool satisfies_run_property(const Bits& a, int n);

struct CorrelationReport {
    std::map<std::int64_t, std::int64_t> values;
    bool passes = false;
    std::vector<std::int64_t> allowed;
};

// Every distinct pair at every shift, plus every member against itself at
// non-zero shifts.
CorrelationReport verify_three_valued(const PnSet& set);

// Values between members of two different sets (no bound asserted).
std::map<std::int64_t, std::int64_t> cross_set_histogram(const PnSet& a, const PnSet& b);

std::string export_pn_set(const PnSet& set);
PnSet import_pn_set(std::string_view text);

}  // namespace msnow
