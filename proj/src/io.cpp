#include "sasv/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sasv::io {

using ordered_json = nlohmann::ordered_json;

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer) {
    namespace fs = std::filesystem;
    if (path.has_parent_path() && !path.parent_path().empty())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open '" + tmp.string() +
                                     "' for writing");
        writer(out);
        out.flush();
        if (!out)
            throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, path);
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::invalid_argument("cannot open '" + path.string() + "'");
    return in;
}

ordered_json provenance_json(const Provenance& prov) {
    ordered_json j;
    j["tool"] = "sasv";
    j["version"] = kToolVersion;
    j["inputs"] = prov.inputs;
    if (prov.seed)
        j["seed"] = *prov.seed;
    else
        j["seed"] = nullptr;
    j["config_hash"] = prov.config_hash;
    return j;
}

void append_le32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t read_le32(std::istream& in, const char* what) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::invalid_argument(std::string("truncated ") + what);
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_manifest(const std::filesystem::path& path,
                    const std::vector<UtteranceRecord>& manifest) {
    validate_manifest(manifest);
    atomic_write(path, [&](std::ostream& out) {
        for (const auto& rec : manifest) {
            ordered_json j;
            j["utt_id"] = rec.utt_id;
            j["speaker_id"] = rec.speaker_id;
            j["gender"] = to_string(rec.gender);
            j["authenticity"] = to_string(rec.authenticity);
            if (rec.authenticity == Authenticity::Spoof)
                j["attack_label"] = rec.attack_label;
            j["embedding_ref"] = rec.embedding_ref;
            out << j.dump() << '\n';
        }
    });
}

std::vector<UtteranceRecord> read_manifest(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<UtteranceRecord> manifest;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception& e) {
            throw std::invalid_argument("manifest '" + path.string() +
                                        "' line " + std::to_string(lineno) +
                                        ": " + e.what());
        }
        UtteranceRecord rec;
        rec.utt_id = j.at("utt_id").get<std::string>();
        rec.speaker_id = j.at("speaker_id").get<std::string>();
        rec.gender = gender_from_string(j.at("gender").get<std::string>());
        rec.authenticity =
            authenticity_from_string(j.at("authenticity").get<std::string>());
        if (j.contains("attack_label"))
            rec.attack_label = j.at("attack_label").get<std::string>();
        rec.embedding_ref = j.at("embedding_ref").get<std::size_t>();
        manifest.push_back(std::move(rec));
    }
    validate_manifest(manifest);
    return manifest;
}

void write_embeddings(const std::filesystem::path& path,
                      const EmbeddingStore& store) {
    atomic_write(path, [&](std::ostream& out) {
        std::string buf;
        buf.reserve(16 + store.size() * store.dim() * 4);
        buf.append("SASVEMB1");
        append_le32(buf, static_cast<std::uint32_t>(store.size()));
        append_le32(buf, static_cast<std::uint32_t>(store.dim()));
        for (std::size_t i = 0; i < store.size(); ++i) {
            for (double x : store.row(i)) {
                const float f = static_cast<float>(x);
                std::uint32_t bits;
                std::memcpy(&bits, &f, 4);
                append_le32(buf, bits);
            }
        }
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    });
}

EmbeddingStore read_embeddings(const std::filesystem::path& path) {
    auto in = open_input(path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "SASVEMB1", 8) != 0)
        throw std::invalid_argument("'" + path.string() +
                                    "' is not a SASVEMB1 embedding file");
    const std::uint32_t count = read_le32(in, "embedding header");
    const std::uint32_t dim = read_le32(in, "embedding header");
    if (dim == 0)
        throw std::invalid_argument("embedding file has zero dim");
    EmbeddingStore store(dim);
    std::vector<double> row(dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        for (std::uint32_t d = 0; d < dim; ++d) {
            const std::uint32_t bits = read_le32(in, "embedding row");
            float f;
            std::memcpy(&f, &bits, 4);
            if (!std::isfinite(f))
                throw std::invalid_argument(
                    "embedding file contains non-finite value at row " +
                    std::to_string(i));
            row[d] = static_cast<double>(f);
        }
        store.append(row);
    }
    char extra;
    if (in.read(&extra, 1))
        throw std::invalid_argument("embedding file has trailing bytes");
    return store;
}

void write_trials(const std::filesystem::path& path,
                  const std::vector<Trial>& trials) {
    atomic_write(path, [&](std::ostream& out) {
        for (const auto& t : trials) {
            ordered_json j;
            j["trial_id"] = t.trial_id;
            j["enroll_ids"] = t.enroll_ids;
            j["test_id"] = t.test_id;
            j["label"] = to_string(t.label);
            out << j.dump() << '\n';
        }
    });
}

std::vector<Trial> read_trials(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<Trial> trials;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception& e) {
            throw std::invalid_argument("trials '" + path.string() + "' line " +
                                        std::to_string(lineno) + ": " +
                                        e.what());
        }
        Trial t;
        t.trial_id = j.at("trial_id").get<std::string>();
        t.enroll_ids = j.at("enroll_ids").get<std::vector<std::string>>();
        t.test_id = j.at("test_id").get<std::string>();
        t.label = trial_class_from_string(j.at("label").get<std::string>());
        if (t.enroll_ids.empty())
            throw std::invalid_argument("trial '" + t.trial_id +
                                        "' has no enrollment utterances");
        trials.push_back(std::move(t));
    }
    return trials;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const double x = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing junk");
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("cannot parse ") + what +
                                    " '" + s + "'");
    }
}

}  // namespace

void write_scores(const std::filesystem::path& path,
                  const std::vector<ScoreRecord>& scores) {
    atomic_write(path, [&](std::ostream& out) {
        out << "trial_id\tlabel\tattack\tllr\n";
        for (const auto& rec : scores) {
            validate_score(rec);
            out << rec.trial_id << '\t' << to_string(rec.label) << '\t'
                << (rec.attack_label.empty() ? "-" : rec.attack_label) << '\t'
                << format_double(rec.llr) << '\n';
        }
    });
}

std::vector<ScoreRecord> read_scores(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<ScoreRecord> scores;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("trial_id\t", 0) == 0) continue;
        const auto cols = split_tabs(line);
        if (cols.size() != 4)
            throw std::invalid_argument("scores '" + path.string() + "' line " +
                                        std::to_string(lineno) +
                                        ": expected 4 tab-separated columns");
        ScoreRecord rec;
        rec.trial_id = cols[0];
        rec.label = trial_class_from_string(cols[1]);
        rec.attack_label = cols[2] == "-" ? "" : cols[2];
        rec.llr = parse_double(cols[3], "llr");
        validate_score(rec);
        scores.push_back(std::move(rec));
    }
    return scores;
}

void write_logits(const std::filesystem::path& path,
                  const std::vector<LogitRecord>& rows) {
    atomic_write(path, [&](std::ostream& out) {
        out << "trial_id\tlabel\tattack\ts_tar\ts_non\ts_spf\n";
        for (const auto& rec : rows) {
            out << rec.trial_id << '\t' << to_string(rec.label) << '\t'
                << (rec.attack_label.empty() ? "-" : rec.attack_label) << '\t'
                << format_double(rec.logits.tar) << '\t'
                << format_double(rec.logits.non) << '\t'
                << format_double(rec.logits.spf) << '\n';
        }
    });
}

std::vector<LogitRecord> read_logits(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<LogitRecord> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("trial_id\t", 0) == 0) continue;
        const auto cols = split_tabs(line);
        if (cols.size() != 6)
            throw std::invalid_argument("logits '" + path.string() + "' line " +
                                        std::to_string(lineno) +
                                        ": expected 6 tab-separated columns");
        LogitRecord rec;
        rec.trial_id = cols[0];
        rec.label = trial_class_from_string(cols[1]);
        rec.attack_label = cols[2] == "-" ? "" : cols[2];
        rec.logits.tar = parse_double(cols[3], "s_tar");
        rec.logits.non = parse_double(cols[4], "s_non");
        rec.logits.spf = parse_double(cols[5], "s_spf");
        validate_logits(rec.logits);
        rows.push_back(std::move(rec));
    }
    return rows;
}

namespace {

ordered_json tensor_json(const std::vector<double>& data,
                         std::vector<std::size_t> shape) {
    ordered_json j;
    j["shape"] = shape;
    j["data"] = data;
    return j;
}

std::vector<double> tensor_from_json(const ordered_json& j,
                                     std::vector<std::size_t> want_shape,
                                     const char* name) {
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    if (shape != want_shape)
        throw std::invalid_argument(std::string("tensor '") + name +
                                    "' has unexpected shape");
    auto data = j.at("data").get<std::vector<double>>();
    std::size_t n = 1;
    for (std::size_t s : want_shape) n *= s;
    if (data.size() != n)
        throw std::invalid_argument(std::string("tensor '") + name +
                                    "' data length mismatch");
    for (double x : data)
        if (!std::isfinite(x))
            throw std::invalid_argument(std::string("tensor '") + name +
                                        "' contains non-finite values");
    return data;
}

}  // namespace

void write_model(const std::filesystem::path& path, const EncoderParams& params,
                 const Provenance& prov) {
    ordered_json j;
    j["format"] = "sasv-encoder";
    j["version"] = 1;
    j["aggregation"] = to_string(params.aggregation);
    if (params.attn) {
        j["dim"] = params.attn->dim;
        j["n_heads"] = params.attn->n_heads;
    } else {
        j["dim"] = params.head.in_dim / 5;
        j["n_heads"] = nullptr;
    }
    ordered_json tensors;
    if (params.attn) {
        const std::size_t d = params.attn->dim;
        tensors["w_q"] = tensor_json(params.attn->w_q, {d, d});
        tensors["w_k"] = tensor_json(params.attn->w_k, {d, d});
        tensors["w_v"] = tensor_json(params.attn->w_v, {d, d});
        tensors["w_o"] = tensor_json(params.attn->w_o, {d, d});
    }
    tensors["w_head"] = tensor_json(params.head.w, {3, params.head.in_dim});
    tensors["b_head"] = tensor_json(params.head.b, {3});
    j["tensors"] = tensors;
    j["provenance"] = provenance_json(prov);
    atomic_write(path,
                 [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

EncoderParams read_model(const std::filesystem::path& path) {
    auto in = open_input(path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw std::invalid_argument("model '" + path.string() +
                                    "': " + e.what());
    }
    if (j.value("format", "") != "sasv-encoder")
        throw std::invalid_argument("'" + path.string() +
                                    "' is not a sasv-encoder model file");
    EncoderParams p;
    p.aggregation =
        aggregation_from_string(j.at("aggregation").get<std::string>());
    const std::size_t dim = j.at("dim").get<std::size_t>();
    if (dim == 0) throw std::invalid_argument("model dim must be positive");
    const auto& tensors = j.at("tensors");
    if (p.aggregation == Aggregation::CrossAttention) {
        AttentionParams a;
        a.dim = dim;
        a.n_heads = j.at("n_heads").get<std::size_t>();
        a.w_q = tensor_from_json(tensors.at("w_q"), {dim, dim}, "w_q");
        a.w_k = tensor_from_json(tensors.at("w_k"), {dim, dim}, "w_k");
        a.w_v = tensor_from_json(tensors.at("w_v"), {dim, dim}, "w_v");
        a.w_o = tensor_from_json(tensors.at("w_o"), {dim, dim}, "w_o");
        p.attn = std::move(a);
    }
    p.head.in_dim = head_input_dim(dim);
    p.head.w =
        tensor_from_json(tensors.at("w_head"), {3, p.head.in_dim}, "w_head");
    p.head.b = tensor_from_json(tensors.at("b_head"), {3}, "b_head");
    validate_params(p, dim);
    return p;
}

void write_calibration(const std::filesystem::path& path,
                       const CalibrationParams& calib, const Provenance& prov) {
    validate_calibration(calib);
    ordered_json j;
    j["format"] = "sasv-calibration";
    j["version"] = 1;
    j["a"] = calib.a;
    j["b"] = calib.b;
    j["c"] = calib.c;
    j["d"] = calib.d;
    j["provenance"] = provenance_json(prov);
    atomic_write(path,
                 [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

CalibrationParams read_calibration(const std::filesystem::path& path) {
    auto in = open_input(path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw std::invalid_argument("calibration '" + path.string() +
                                    "': " + e.what());
    }
    if (j.value("format", "") != "sasv-calibration")
        throw std::invalid_argument("'" + path.string() +
                                    "' is not a sasv-calibration file");
    CalibrationParams p{j.at("a").get<double>(), j.at("b").get<double>(),
                        j.at("c").get<double>(), j.at("d").get<double>()};
    validate_calibration(p);
    return p;
}

void write_loss_curve(const std::filesystem::path& path,
                      const std::vector<double>& losses) {
    atomic_write(path, [&](std::ostream& out) {
        out << "epoch,mean_loss\n";
        for (std::size_t i = 0; i < losses.size(); ++i)
            out << i << ',' << format_double(losses[i]) << '\n';
    });
}

}  // namespace sasv::io
