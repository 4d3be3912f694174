#include "cphom/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cphom {

namespace {

// Whitespace tokenizer that skips '#' comment lines and remembers line numbers.
class Tokens {
public:
    explicit Tokens(std::istream& in) : in_(in) {}

    bool next(std::string& tok) {
        while (true) {
            if (line_stream_ >> tok) return true;
            std::string line;
            if (!std::getline(in_, line)) return false;
            ++line_no_;
            const auto first = line.find_first_not_of(" \t\r");
            if (first != std::string::npos && line[first] == '#') line.clear();
            line_stream_.clear();
            line_stream_.str(line);
        }
    }

    // Tokens of the next non-comment line.
    bool next_line(std::vector<std::string>& toks) {
        toks.clear();
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            std::istringstream ls(line);
            std::string t;
            while (ls >> t) toks.push_back(t);
            return true;
        }
        return false;
    }

    long line() const { return line_no_; }

private:
    std::istream& in_;
    std::istringstream line_stream_;
    long line_no_ = 0;
};

[[noreturn]] void parse_fail(const Tokens& t, const std::string& msg) {
    throw Error(ErrorKind::Parse, "line " + std::to_string(t.line()) + ": " + msg);
}

double to_real(const Tokens& t, const std::string& s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) parse_fail(t, "not a real number: '" + s + "'");
    return v;
}

Index to_index(const Tokens& t, const std::string& s) {
    long long v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) parse_fail(t, "not an integer: '" + s + "'");
    return static_cast<Index>(v);
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
    return out;
}

} // namespace

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

DenseTensor parse_tensor(std::istream& in) {
    Tokens tok(in);
    std::vector<std::string> head;
    if (!tok.next_line(head)) throw Error(ErrorKind::Parse, "line 1: missing 'tensor' header");
    if (head.empty() || head[0] != "tensor") parse_fail(tok, "expected header 'tensor N d1 ... dN'");
    if (head.size() < 2) parse_fail(tok, "header missing order");
    const Index n = to_index(tok, head[1]);
    if (n < 2 || n > 4) parse_fail(tok, "tensor order must be 2, 3 or 4");
    if (static_cast<Index>(head.size()) != 2 + n) parse_fail(tok, "header lists wrong number of dims");
    Dims dims;
    for (Index i = 0; i < n; ++i) {
        const Index d = to_index(tok, head[2 + i]);
        if (d < 1) parse_fail(tok, "dims must be positive");
        dims.push_back(d);
    }
    const Index count = dims_product(dims);
    Eigen::VectorXd data(count);
    std::string s;
    for (Index i = 0; i < count; ++i) {
        if (!tok.next(s))
            parse_fail(tok, "expected " + std::to_string(count) + " values, got " + std::to_string(i));
        data(i) = to_real(tok, s);
    }
    if (tok.next(s)) parse_fail(tok, "trailing data after " + std::to_string(count) + " values");
    return DenseTensor(std::move(dims), std::move(data));
}

FactorSet parse_factors(std::istream& in) {
    Tokens tok(in);
    std::vector<std::string> head;
    if (!tok.next_line(head)) throw Error(ErrorKind::Parse, "line 1: missing 'factors' header");
    if (head.empty() || head[0] != "factors") parse_fail(tok, "expected header 'factors N R d1 ... dN'");
    if (head.size() < 3) parse_fail(tok, "header missing order or rank");
    const Index n = to_index(tok, head[1]);
    const Index r = to_index(tok, head[2]);
    if (n < 2 || n > 4) parse_fail(tok, "factor order must be 2, 3 or 4");
    if (r < 1) parse_fail(tok, "rank must be positive");
    if (static_cast<Index>(head.size()) != 3 + n) parse_fail(tok, "header lists wrong number of dims");
    FactorSet f;
    std::string s;
    for (Index k = 0; k < n; ++k) {
        const Index d = to_index(tok, head[3 + k]);
        if (d < 1) parse_fail(tok, "dims must be positive");
        Eigen::MatrixXd m(d, r);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < r; ++j) {
                if (!tok.next(s)) parse_fail(tok, "factor block " + std::to_string(k) + " is short");
                m(i, j) = to_real(tok, s);
            }
        f.factors.push_back(std::move(m));
    }
    if (tok.next(s)) parse_fail(tok, "trailing data after factor blocks");
    return f;
}

void write_tensor(std::ostream& out, const DenseTensor& t) {
    out << "tensor " << t.order();
    for (Index d : t.dims()) out << ' ' << d;
    out << '\n';
    // One leading-mode fiber per line keeps files readable.
    const Index per_line = t.dim(0);
    for (Index i = 0; i < t.size(); ++i) {
        out << format_real(t.data()(i));
        out << (((i + 1) % per_line == 0) ? '\n' : ' ');
    }
}

void write_factors(std::ostream& out, const FactorSet& f) {
    out << "factors " << f.order() << ' ' << f.rank();
    for (Index d : f.dims()) out << ' ' << d;
    out << '\n';
    for (const auto& m : f.factors) {
        for (Index i = 0; i < m.rows(); ++i) {
            for (Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_real(m(i, j));
            out << '\n';
        }
    }
}

DenseTensor read_tensor_file(const std::string& path) {
    auto in = open_in(path);
    return parse_tensor(in);
}

FactorSet read_factor_file(const std::string& path) {
    auto in = open_in(path);
    return parse_factors(in);
}

void write_tensor_file(const std::string& path, const DenseTensor& t) {
    auto out = open_out(path);
    write_tensor(out, t);
    if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

void write_factor_file(const std::string& path, const FactorSet& f) {
    auto out = open_out(path);
    write_factors(out, f);
    if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

nlohmann::json report_to_json(const DecompositionReport& rep) {
    nlohmann::json j;
    j["relative_error"] = rep.relative_error;
    j["s_real"] = rep.s_real;
    j["deltas"] = rep.deltas;
    j["paths"] = {{"converged", rep.path_stats.converged},
                  {"diverged", rep.path_stats.diverged},
                  {"stalled", rep.path_stats.stalled}};
    j["seed"] = rep.seed;
    j["gamma_re"] = rep.gamma.real();
    j["gamma_im"] = rep.gamma.imag();
    j["rank_used"] = rep.rank_used;
    return j;
}

std::string report_to_text(const DecompositionReport& rep) {
    std::ostringstream os;
    os << "relative_error " << format_real(rep.relative_error) << '\n'
       << "rank_used " << rep.rank_used << '\n'
       << "s_real " << rep.s_real << '\n'
       << "paths converged " << rep.path_stats.converged << " diverged " << rep.path_stats.diverged << " stalled "
       << rep.path_stats.stalled << '\n'
       << "w_condition " << format_real(rep.w_condition) << '\n'
       << "seed " << rep.seed << '\n'
       << "gamma " << format_real(rep.gamma.real()) << ' ' << format_real(rep.gamma.imag()) << '\n'
       << "deltas";
    for (double d : rep.deltas) os << ' ' << format_real(d);
    os << '\n';
    for (const auto& w : rep.warnings) os << "warning " << w << '\n';
    return os.str();
}

} // namespace cphom
