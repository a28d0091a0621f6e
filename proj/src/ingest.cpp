#include "ggconv/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ggconv/errors.hpp"
#include "ggconv/rng.hpp"

namespace ggconv {

namespace {

int element_slot(const std::string& symbol) {
    for (size_t k = 0; k < kElementVocab.size(); ++k)
        if (symbol == kElementVocab[k]) return static_cast<int>(k);
    return static_cast<int>(kElementVocab.size());  // "other"
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double_field(const std::string& text, const char* what, long line) {
    try {
        size_t pos = 0;
        const double v = std::stod(text, &pos);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, std::string("cannot parse ") + what + " from '" + text + "'");
    }
}

}  // namespace

Matrix featurize_atoms(const std::vector<std::string>& elements,
                       std::vector<std::string>* warnings) {
    Matrix features = Matrix::Zero(static_cast<Eigen::Index>(elements.size()), kNumElementFeatures);
    for (size_t a = 0; a < elements.size(); ++a) {
        const int slot = element_slot(elements[a]);
        if (warnings && slot == kNumElementFeatures - 1)
            warnings->push_back("unknown element symbol '" + elements[a] +
                                "' mapped to the 'other' bucket");
        features(static_cast<Eigen::Index>(a), slot) = 1.0;
    }
    return features;
}

std::vector<Graph3D> parse_jsonl(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset: " + path);

    std::vector<Graph3D> graphs;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, e.what());
        }

        Graph3D g;
        try {
            g.id = j.value("id", "line-" + std::to_string(line_no));
            const auto& nodes = j.at("nodes");
            if (!nodes.is_array() || nodes.empty())
                throw ParseError(line_no, "record needs a non-empty 'nodes' array");

            std::vector<std::string> elements;
            std::vector<std::vector<double>> extras;
            g.positions.resize(static_cast<Eigen::Index>(nodes.size()), 3);
            Eigen::Index r = 0;
            for (const auto& node : nodes) {
                elements.push_back(node.at("element").get<std::string>());
                g.positions(r, 0) = node.at("x").get<double>();
                g.positions(r, 1) = node.at("y").get<double>();
                g.positions(r, 2) = node.at("z").get<double>();
                extras.push_back(node.value("extra", std::vector<double>{}));
                ++r;
            }

            Matrix onehot = featurize_atoms(elements, warnings);
            const size_t extra_dim = extras.front().size();
            for (const auto& e : extras)
                if (e.size() != extra_dim)
                    throw ParseError(line_no, "nodes disagree on 'extra' feature length");
            g.node_features.resize(onehot.rows(), kNumElementFeatures + static_cast<Eigen::Index>(extra_dim));
            g.node_features.leftCols(kNumElementFeatures) = onehot;
            for (Eigen::Index a = 0; a < g.node_features.rows(); ++a)
                for (size_t e = 0; e < extra_dim; ++e)
                    g.node_features(a, kNumElementFeatures + static_cast<Eigen::Index>(e)) =
                        extras[static_cast<size_t>(a)][e];

            // Edges may be listed once per bond; both directions are stored.
            std::set<std::pair<int, int>> seen;
            std::vector<double> orders;
            bool any_order = false;
            for (const auto& e : j.value("edges", nlohmann::json::array())) {
                if (!e.is_array() || e.size() < 2)
                    throw ParseError(line_no, "each edge must be [i, j] or [i, j, bond_order]");
                const int i = e[0].get<int>();
                const int k = e[1].get<int>();
                double order = 1.0;
                if (e.size() >= 3) {
                    order = e[2].get<double>();
                    any_order = true;
                }
                for (auto [a, b] : {std::pair{i, k}, std::pair{k, i}}) {
                    if (seen.insert({a, b}).second) {
                        g.edge_index.emplace_back(a, b);
                        orders.push_back(order);
                    }
                }
            }
            if (any_order) {
                Matrix ef(static_cast<Eigen::Index>(orders.size()), 1);
                for (size_t e = 0; e < orders.size(); ++e)
                    ef(static_cast<Eigen::Index>(e), 0) = orders[e];
                g.edge_features = std::move(ef);
            }

            if (j.contains("target") && !j.at("target").is_null())
                g.target = j.at("target").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, e.what());
        }

        require_valid(g);
        graphs.push_back(std::move(g));
    }
    return graphs;
}

namespace {

struct SdfRecord {
    std::vector<std::string> lines;
    long start_line = 0;  // 1-based line number of the first line
};

int parse_counts_field(const std::string& counts_line, size_t offset, long line_no) {
    if (counts_line.size() < offset + 3)
        throw CountsMismatch("counts line too short at line " + std::to_string(line_no));
    const std::string field = trim(counts_line.substr(offset, 3));
    try {
        return std::stoi(field);
    } catch (const std::exception&) {
        throw CountsMismatch("cannot read counts field '" + field + "' at line " +
                             std::to_string(line_no));
    }
}

Graph3D parse_molblock(const SdfRecord& rec, const std::string& target_field,
                       std::vector<std::string>* warnings, size_t record_index) {
    const auto& lines = rec.lines;
    if (lines.size() < 4) throw ParseError(rec.start_line, "molblock shorter than its header");

    const std::string& counts = lines[3];
    if (counts.find("V3000") != std::string::npos)
        throw UnsupportedFormat("V3000 molblocks are not supported (record at line " +
                                std::to_string(rec.start_line) + ")");
    const int natoms = parse_counts_field(counts, 0, rec.start_line + 3);
    const int nbonds = parse_counts_field(counts, 3, rec.start_line + 3);
    if (natoms < 1)
        throw CountsMismatch("molblock at line " + std::to_string(rec.start_line) +
                             " declares no atoms");
    if (lines.size() < static_cast<size_t>(4 + natoms + nbonds))
        throw CountsMismatch("molblock at line " + std::to_string(rec.start_line) +
                             " ends before the declared atom/bond blocks");

    Graph3D g;
    g.id = trim(lines[0]).empty() ? "sdf-" + std::to_string(record_index) : trim(lines[0]);

    std::vector<std::string> elements;
    g.positions.resize(natoms, 3);
    for (int a = 0; a < natoms; ++a) {
        const std::string& line = lines[4 + static_cast<size_t>(a)];
        const long line_no = rec.start_line + 4 + a;
        if (line.size() < 34)
            throw CountsMismatch("atom line " + std::to_string(line_no) + " too short");
        g.positions(a, 0) = parse_double_field(line.substr(0, 10), "x coordinate", line_no);
        g.positions(a, 1) = parse_double_field(line.substr(10, 10), "y coordinate", line_no);
        g.positions(a, 2) = parse_double_field(line.substr(20, 10), "z coordinate", line_no);
        elements.push_back(trim(line.substr(31, 3)));
    }
    g.node_features = featurize_atoms(elements, warnings);

    Matrix ef(2 * nbonds, 1);
    for (int b = 0; b < nbonds; ++b) {
        const std::string& line = lines[4 + static_cast<size_t>(natoms + b)];
        const long line_no = rec.start_line + 4 + natoms + b;
        if (line.size() < 6)
            throw CountsMismatch("bond line " + std::to_string(line_no) + " too short");
        const int i = parse_counts_field(line, 0, line_no) - 1;  // 1-based in the file
        const int j = parse_counts_field(line, 3, line_no) - 1;
        double order = 1.0;
        if (line.size() >= 9) {
            const std::string field = trim(line.substr(6, 3));
            if (!field.empty()) order = parse_double_field(field, "bond order", line_no);
        }
        g.edge_index.emplace_back(i, j);
        g.edge_index.emplace_back(j, i);
        ef(2 * b, 0) = order;
        ef(2 * b + 1, 0) = order;
    }
    if (nbonds > 0) g.edge_features = std::move(ef);

    // Data items: "> ... <FIELD>" followed by value lines.
    if (!target_field.empty()) {
        for (size_t li = 4 + static_cast<size_t>(natoms + nbonds); li < lines.size(); ++li) {
            const std::string& line = lines[li];
            if (line.rfind(">", 0) == 0 && line.find("<" + target_field + ">") != std::string::npos) {
                if (li + 1 >= lines.size())
                    throw ParseError(rec.start_line + static_cast<long>(li),
                                     "data field '" + target_field + "' has no value line");
                g.target = parse_double_field(trim(lines[li + 1]), "target value",
                                              rec.start_line + static_cast<long>(li) + 1);
                break;
            }
        }
        if (!g.target && warnings)
            warnings->push_back("record '" + g.id + "' is missing data field <" + target_field +
                                ">");
    }

    require_valid(g);
    return g;
}

}  // namespace

std::vector<Graph3D> parse_sdf(const std::string& path, const std::string& target_field,
                               std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset: " + path);

    std::vector<SdfRecord> records;
    SdfRecord current;
    current.start_line = 1;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line) == "$$$$") {
            if (!current.lines.empty()) records.push_back(std::move(current));
            current = SdfRecord{};
            current.start_line = line_no + 1;
        } else {
            current.lines.push_back(line);
        }
    }
    // Trailing record without the $$$$ terminator (single-molecule files).
    if (std::any_of(current.lines.begin(), current.lines.end(),
                    [](const std::string& l) { return !trim(l).empty(); }))
        records.push_back(std::move(current));

    std::vector<Graph3D> graphs;
    graphs.reserve(records.size());
    for (size_t r = 0; r < records.size(); ++r)
        graphs.push_back(parse_molblock(records[r], target_field, warnings, r));
    return graphs;
}

SplitResult split(const std::vector<Graph3D>& dataset, const SplitSpec& spec) {
    const int n = static_cast<int>(dataset.size());
    std::array<int, 3> counts{};

    if (spec.counts) {
        counts = *spec.counts;
        if (counts[0] < 0 || counts[1] < 0 || counts[2] < 0 ||
            counts[0] + counts[1] + counts[2] != n) {
            std::ostringstream os;
            os << "split counts " << counts[0] << "/" << counts[1] << "/" << counts[2]
               << " do not sum to the dataset size " << n;
            throw SizeMismatch(os.str());
        }
    } else if (spec.fractions) {
        const auto& f = *spec.fractions;
        if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9)
            throw SizeMismatch("split fractions must sum to 1");
        counts[0] = static_cast<int>(std::llround(f[0] * n));
        counts[1] = static_cast<int>(std::llround(f[1] * n));
        counts[2] = n - counts[0] - counts[1];
        if (counts[2] < 0) throw SizeMismatch("rounded split fractions exceed the dataset size");
    } else {
        throw SizeMismatch("split spec needs fractions or counts");
    }

    std::vector<int> order(dataset.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(spec.seed);
    rng.shuffle(order);

    SplitResult result;
    std::array<std::vector<Graph3D>*, 3> parts = {&result.train, &result.val, &result.test};
    int pos = 0;
    for (size_t p = 0; p < parts.size(); ++p) {
        parts[p]->reserve(static_cast<size_t>(counts[p]));
        for (int i = 0; i < counts[p]; ++i)
            parts[p]->push_back(dataset[static_cast<size_t>(order[pos++])]);
    }
    return result;
}

std::string to_jsonl_record(const Graph3D& graph) {
    nlohmann::json j;
    j["id"] = graph.id;

    // Graphs whose features follow the ingest layout (one-hot element block
    // plus extras) round-trip exactly; anything else serializes its whole
    // feature row under "extra" with the placeholder element X.
    const bool onehot_layout = graph.node_features.cols() >= kNumElementFeatures;
    nlohmann::json nodes = nlohmann::json::array();
    for (Eigen::Index a = 0; a < graph.node_features.rows(); ++a) {
        nlohmann::json node;
        Eigen::Index extra_from = 0;
        if (onehot_layout) {
            int slot = kNumElementFeatures - 1;
            for (int k = 0; k < kNumElementFeatures - 1; ++k)
                if (graph.node_features(a, k) == 1.0) slot = k;
            node["element"] = slot < kNumElementFeatures - 1
                                  ? std::string(kElementVocab[static_cast<size_t>(slot)])
                                  : "X";
            extra_from = kNumElementFeatures;
        } else {
            node["element"] = "X";
        }
        node["x"] = graph.positions(a, 0);
        node["y"] = graph.positions(a, 1);
        node["z"] = graph.positions(a, 2);
        if (graph.node_features.cols() > extra_from) {
            std::vector<double> extra;
            for (Eigen::Index c = extra_from; c < graph.node_features.cols(); ++c)
                extra.push_back(graph.node_features(a, c));
            node["extra"] = std::move(extra);
        }
        nodes.push_back(std::move(node));
    }
    j["nodes"] = std::move(nodes);

    nlohmann::json edges = nlohmann::json::array();
    for (size_t e = 0; e < graph.edge_index.size(); ++e) {
        const auto& [i, k] = graph.edge_index[e];
        if (i < k) {  // emit each unordered bond once
            if (graph.edge_features)
                edges.push_back({i, k, (*graph.edge_features)(static_cast<Eigen::Index>(e), 0)});
            else
                edges.push_back({i, k});
        }
    }
    j["edges"] = std::move(edges);

    if (graph.target) j["target"] = *graph.target;
    return j.dump();
}

void write_jsonl(const std::vector<Graph3D>& graphs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output path: " + path);
    for (const auto& g : graphs) out << to_jsonl_record(g) << "\n";
}

}  // namespace ggconv
