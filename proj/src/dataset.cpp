#include "mctl/dataset.hpp"

#include "mctl/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace mctl {

namespace {

std::string trim(std::string_view text) {
    auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos)
        return {};
    auto end = text.find_last_not_of(" \t\r");
    return std::string(text.substr(begin, end - begin + 1));
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string_view rest(line);
    while (true) {
        auto comma = rest.find(',');
        cells.push_back(trim(rest.substr(0, comma)));
        if (comma == std::string_view::npos)
            break;
        rest.remove_prefix(comma + 1);
    }
    return cells;
}

std::string cell_location(const std::filesystem::path& path, std::size_t line,
                          const std::string& column) {
    std::ostringstream out;
    out << path.string() << ": line " << line << ", column '" << column << "'";
    return out.str();
}

double parse_double(const std::string& cell, const std::string& where) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (cell.empty() || ec != std::errc() || ptr != last)
        throw InputError(where + ": non-numeric cell '" + cell + "'");
    if (!std::isfinite(value))
        throw InputError(where + ": non-finite value '" + cell + "'");
    return value;
}

int parse_label(const std::string& cell, const std::string& where) {
    int value = 0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc() && ptr == last && !cell.empty())
        return value;
    // Accept integral floats such as "3.0" written by other tools.
    double real = parse_double(cell, where);
    if (real != std::floor(real) || std::abs(real) > 2147483647.0)
        throw InputError(where + ": label is not an integer '" + cell + "'");
    return static_cast<int>(real);
}

Matrix rotation2d(double degrees) {
    const double rad = degrees * std::numbers::pi / 180.0;
    Matrix rot(2, 2);
    rot << std::cos(rad), -std::sin(rad), std::sin(rad), std::cos(rad);
    return rot;
}

Dataset make_dataset(Matrix features, std::vector<int> labels, std::string name) {
    Dataset out;
    out.features = std::move(features);
    out.labels = std::move(labels);
    out.name = std::move(name);
    return out;
}

DomainPair rotated_gaussians(const SyntheticSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const Index n = static_cast<Index>(spec.classes) * spec.n_per_class;
    Matrix src(2, n);
    std::vector<int> labels(static_cast<std::size_t>(n));
    Index col = 0;
    for (int c = 0; c < spec.classes; ++c) {
        const double angle = 2.0 * std::numbers::pi * c / spec.classes;
        for (int i = 0; i < spec.n_per_class; ++i, ++col) {
            src(0, col) = std::cos(angle) + spec.noise_sigma * noise(rng);
            src(1, col) = std::sin(angle) + spec.noise_sigma * noise(rng);
            labels[static_cast<std::size_t>(col)] = c;
        }
    }
    Matrix tgt = rotation2d(spec.rotation_deg) * src;
    return {make_dataset(std::move(src), labels, "rotated-gaussians/source"),
            make_dataset(std::move(tgt), labels, "rotated-gaussians/target")};
}

DomainPair two_moons(const SyntheticSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> arc(0.0, std::numbers::pi);
    const Index n = static_cast<Index>(spec.classes) * spec.n_per_class;
    Matrix src(2, n);
    std::vector<int> labels(static_cast<std::size_t>(n));
    Index col = 0;
    for (int c = 0; c < spec.classes; ++c) {
        // Moons pair up (upper, lower); additional pairs are shifted along x.
        const double shift = 3.0 * (c / 2);
        const bool upper = c % 2 == 0;
        for (int i = 0; i < spec.n_per_class; ++i, ++col) {
            const double t = arc(rng);
            double x = upper ? std::cos(t) : 1.0 - std::cos(t);
            double y = upper ? std::sin(t) : 0.5 - std::sin(t);
            src(0, col) = x + shift + spec.noise_sigma * noise(rng);
            src(1, col) = y + spec.noise_sigma * noise(rng);
            labels[static_cast<std::size_t>(col)] = c;
        }
    }
    const Vector centroid = src.rowwise().mean();
    Matrix tgt = (rotation2d(spec.rotation_deg) * (src.colwise() - centroid)).colwise() + centroid;
    return {make_dataset(std::move(src), labels, "two-moons/source"),
            make_dataset(std::move(tgt), labels, "two-moons/target")};
}

DomainPair locality_shift(const SyntheticSpec& spec) {
    constexpr int kClusters = 3;
    constexpr double kClassRadius = 1.0;
    constexpr double kClusterRadius = 0.75;
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const Index n = static_cast<Index>(spec.classes) * spec.n_per_class;
    Matrix src(2, n);
    Matrix tgt(2, n);
    std::vector<int> labels(static_cast<std::size_t>(n));
    const Matrix rot = rotation2d(spec.rotation_deg);
    Index col = 0;
    for (int c = 0; c < spec.classes; ++c) {
        const double angle = 2.0 * std::numbers::pi * c / spec.classes;
        const Eigen::Vector2d mean(kClassRadius * std::cos(angle), kClassRadius * std::sin(angle));
        for (int i = 0; i < spec.n_per_class; ++i, ++col) {
            const int cluster = i % kClusters;
            const double phase = angle + 2.0 * std::numbers::pi * cluster / kClusters;
            const Eigen::Vector2d offset(kClusterRadius * std::cos(phase),
                                         kClusterRadius * std::sin(phase));
            const Eigen::Vector2d jitter(spec.noise_sigma * noise(rng), spec.noise_sigma * noise(rng));
            src.col(col) = mean + offset + jitter;
            // Sub-cluster centers turn about their class mean; offsets of a
            // class sum to zero before and after, so class means stay put.
            tgt.col(col) = mean + rot * offset + jitter;
            labels[static_cast<std::size_t>(col)] = c;
        }
    }
    return {make_dataset(std::move(src), labels, "locality-shift/source"),
            make_dataset(std::move(tgt), labels, "locality-shift/target")};
}

} // namespace

void Dataset::validate() const {
    if (!features.allFinite())
        throw InputError("dataset '" + name + "' contains NaN or Inf entries");
    if (labels && static_cast<Index>(labels->size()) != features.cols())
        throw InputError("dataset '" + name + "' has " + std::to_string(labels->size()) +
                         " labels for " + std::to_string(features.cols()) + " samples");
}

const std::vector<int>& Dataset::require_labels(const std::string& what) const {
    if (!labels)
        throw InputError(what + ": dataset '" + name + "' has no labels");
    return *labels;
}

Dataset concat(const Dataset& a, const Dataset& b, std::string name) {
    if (a.dim() != b.dim())
        throw InputError("cannot concatenate datasets of dimension " + std::to_string(a.dim()) +
                         " and " + std::to_string(b.dim()));
    Dataset out;
    out.features.resize(a.dim(), a.size() + b.size());
    out.features << a.features, b.features;
    if (a.labels && b.labels) {
        std::vector<int> labels = *a.labels;
        labels.insert(labels.end(), b.labels->begin(), b.labels->end());
        out.labels = std::move(labels);
    }
    out.name = name.empty() ? a.name + "+" + b.name : std::move(name);
    return out;
}

Dataset select(const Dataset& data, const std::vector<Index>& indices, std::string name) {
    Dataset out;
    out.features.resize(data.dim(), static_cast<Index>(indices.size()));
    std::vector<int> labels;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const Index src = indices[i];
        if (src < 0 || src >= data.size())
            throw InputError("sample index out of range in select()");
        out.features.col(static_cast<Index>(i)) = data.features.col(src);
        if (data.labels)
            labels.push_back((*data.labels)[static_cast<std::size_t>(src)]);
    }
    if (data.labels)
        out.labels = std::move(labels);
    out.name = name.empty() ? data.name : std::move(name);
    return out;
}

std::optional<SyntheticKind> parse_synthetic_kind(const std::string& text) {
    if (text == "rotated-gaussians")
        return SyntheticKind::RotatedGaussians;
    if (text == "two-moons" || text == "two-moons-shift")
        return SyntheticKind::TwoMoonsShift;
    if (text == "locality-shift")
        return SyntheticKind::LocalityShift;
    return std::nullopt;
}

std::string to_string(SyntheticKind kind) {
    switch (kind) {
    case SyntheticKind::RotatedGaussians: return "rotated-gaussians";
    case SyntheticKind::TwoMoonsShift: return "two-moons";
    case SyntheticKind::LocalityShift: return "locality-shift";
    }
    return "unknown";
}

void SyntheticSpec::validate() const {
    if (n_per_class < 1)
        throw ConfigError("synthetic spec: n_per_class must be >= 1");
    if (classes < 2)
        throw ConfigError("synthetic spec: classes must be >= 2");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
        throw ConfigError("synthetic spec: noise_sigma must be finite and >= 0");
    if (!std::isfinite(rotation_deg))
        throw ConfigError("synthetic spec: rotation_deg must be finite");
}

DomainPair generate(const SyntheticSpec& spec) {
    spec.validate();
    switch (spec.kind) {
    case SyntheticKind::RotatedGaussians: return rotated_gaussians(spec);
    case SyntheticKind::TwoMoonsShift: return two_moons(spec);
    case SyntheticKind::LocalityShift: return locality_shift(spec);
    }
    throw ConfigError("synthetic spec: unknown kind");
}

Dataset load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open '" + path.string() + "'");

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_row(line);
            break;
        }
    }
    if (header.empty())
        throw InputError("'" + path.string() + "' is empty (expected a header row)");
    // A UTF-8 byte-order mark would otherwise end up in the first column name.
    if (header.front().rfind("\xEF\xBB\xBF", 0) == 0)
        header.front().erase(0, 3);

    std::optional<std::size_t> label_index;
    if (label_column) {
        auto it = std::find(header.begin(), header.end(), *label_column);
        if (it == header.end())
            throw InputError("'" + path.string() + "': unknown label column '" + *label_column + "'");
        label_index = static_cast<std::size_t>(it - header.begin());
    }
    const std::size_t width = header.size();
    const std::size_t dim = width - (label_index ? 1 : 0);
    if (dim == 0)
        throw InputError("'" + path.string() + "' has no feature columns");

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        auto cells = split_row(line);
        if (cells.size() != width)
            throw InputError(path.string() + ": line " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " cells, header has " +
                             std::to_string(width));
        for (std::size_t j = 0; j < width; ++j) {
            const auto where = cell_location(path, line_no, header[j]);
            if (label_index && j == *label_index)
                labels.push_back(parse_label(cells[j], where));
            else
                values.push_back(parse_double(cells[j], where));
        }
        ++rows;
    }

    Dataset out;
    out.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>>(
        values.data(), static_cast<Index>(dim), static_cast<Index>(rows));
    if (label_index)
        out.labels = std::move(labels);
    out.name = path.stem().string();
    return out;
}

void save_csv(const Dataset& data, const std::filesystem::path& path, const std::string& label_column) {
    data.validate();
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write '" + path.string() + "'");
    for (Index i = 0; i < data.dim(); ++i)
        out << (i ? "," : "") << 'f' << i;
    if (data.labels)
        out << ',' << label_column;
    out << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Index j = 0; j < data.size(); ++j) {
        for (Index i = 0; i < data.dim(); ++i)
            out << (i ? "," : "") << data.features(i, j);
        if (data.labels)
            out << ',' << (*data.labels)[static_cast<std::size_t>(j)];
        out << '\n';
    }
    if (!out)
        throw InputError("failed while writing '" + path.string() + "'");
}

std::vector<Dataset> standardize(const Dataset& fit_on, const std::vector<Dataset>& apply_to) {
    const Index m = fit_on.dim();
    Vector mean = Vector::Zero(m);
    Vector scale = Vector::Zero(m);
    if (fit_on.size() > 0) {
        mean = fit_on.features.rowwise().mean();
        const Vector var = (fit_on.features.colwise() - mean).array().square().rowwise().mean();
        for (Index i = 0; i < m; ++i) {
            const double sd = std::sqrt(var(i));
            // Spread below rounding noise of the mean counts as constant.
            const double floor = 1e-12 * std::max(1.0, std::abs(mean(i)));
            scale(i) = sd > floor ? 1.0 / sd : 0.0;
        }
    }
    std::vector<Dataset> out;
    out.reserve(apply_to.size());
    for (const auto& data : apply_to) {
        if (data.dim() != m)
            throw InputError("standardize: dataset '" + data.name + "' has dimension " +
                             std::to_string(data.dim()) + ", expected " + std::to_string(m));
        Dataset z = data;
        z.features = (data.features.colwise() - mean).array().colwise() * scale.array();
        out.push_back(std::move(z));
    }
    return out;
}

Split split(const Dataset& data, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw ConfigError("split fraction must lie in [0, 1]");
    std::map<int, std::vector<Index>> groups;
    for (Index j = 0; j < data.size(); ++j)
        groups[data.labels ? (*data.labels)[static_cast<std::size_t>(j)] : 0].push_back(j);

    // Largest-remainder allocation so the overall count is round(fraction * n)
    // while every class keeps its floor share; leftovers go to the largest
    // remainders, ties to the smaller label.
    const auto total = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(data.size())));
    std::vector<std::size_t> take;
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (const auto& [label, members] : groups) {
        const double exact = fraction * static_cast<double>(members.size());
        const auto base = static_cast<std::size_t>(std::floor(exact));
        remainders.emplace_back(exact - static_cast<double>(base), take.size());
        take.push_back(base);
        assigned += base;
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < total && r < remainders.size(); ++r, ++assigned)
        ++take[remainders[r].second];

    std::mt19937_64 rng(seed);
    std::vector<Index> first, second;
    std::size_t g = 0;
    for (auto& [label, members] : groups) {
        // Fisher-Yates with explicit draws; std::shuffle is not portable across
        // standard libraries.
        for (std::size_t i = members.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % i);
            std::swap(members[i - 1], members[j]);
        }
        const auto cut = static_cast<std::ptrdiff_t>(take[g++]);
        first.insert(first.end(), members.begin(), members.begin() + cut);
        second.insert(second.end(), members.begin() + cut, members.end());
    }
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    return {select(data, first, data.name + "/a"), select(data, second, data.name + "/b")};
}

} // namespace mctl
