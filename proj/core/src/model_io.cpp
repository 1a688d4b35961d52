#include "cryptoseq/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "cryptoseq/errors.hpp"

namespace cryptoseq {

namespace {

void write_le_double(std::ofstream& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_le_double(std::ifstream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (!in) {
        throw IoError("load_network: truncated parameter block");
    }
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

std::string format_rate(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void save_network(const RecurrentNetwork& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("save_network: cannot open '" + path + "'");
    }
    const auto refs = param_refs(const_cast<RecurrentNetwork&>(net));
    std::size_t count = 0;
    for (const Matrix* m : refs) count += m->size();

    out << "cryptoseq-model v1\n";
    out << "family " << family_name(net.spec.family) << '\n';
    out << "lookback " << net.spec.lookback << '\n';
    out << "input_width " << net.spec.input_width << '\n';
    out << "dropout_rate " << format_rate(net.spec.dropout_rate) << '\n';
    out << "recurrent_dropout_rate " << format_rate(net.spec.recurrent_dropout_rate) << '\n';
    out << "param_count " << count << '\n';
    out << "end-header\n";
    for (const Matrix* m : refs) {
        for (double v : m->values()) write_le_double(out, v);
    }
    if (!out) {
        throw IoError("save_network: failed writing '" + path + "'");
    }
}

RecurrentNetwork load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("load_network: cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line) || line != "cryptoseq-model v1") {
        throw SchemaError("load_network: '" + path + "' is not a cryptoseq-model v1 file");
    }
    std::map<std::string, std::string> fields;
    while (std::getline(in, line)) {
        if (line == "end-header") break;
        const auto space = line.find(' ');
        if (space == std::string::npos) {
            throw SchemaError("load_network: malformed header line '" + line + "'");
        }
        fields[line.substr(0, space)] = line.substr(space + 1);
    }
    for (const char* key :
         {"family", "lookback", "input_width", "dropout_rate", "recurrent_dropout_rate",
          "param_count"}) {
        if (!fields.count(key)) {
            throw SchemaError("load_network: missing header field '" + std::string(key) + "'");
        }
    }

    const NetworkSpec spec = make_spec(
        parse_family(fields["family"]), std::stoull(fields["lookback"]),
        std::stoull(fields["input_width"]), std::stod(fields["dropout_rate"]),
        std::stod(fields["recurrent_dropout_rate"]));

    RandomStream rng(0);
    RecurrentNetwork net = init_network(spec, rng);
    auto refs = param_refs(net);
    std::size_t count = 0;
    for (const Matrix* m : refs) count += m->size();
    const std::size_t expected = std::stoull(fields["param_count"]);
    if (expected != count) {
        throw SchemaError("load_network: header declares " + fields["param_count"] +
                          " parameters, spec requires " + std::to_string(count));
    }
    for (Matrix* m : refs) {
        for (double& v : m->values()) v = read_le_double(in);
    }
    return net;
}

} // namespace cryptoseq
