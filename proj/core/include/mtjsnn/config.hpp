#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mtjsnn/characterize.hpp"
#include "mtjsnn/device.hpp"
#include "mtjsnn/network.hpp"
#include "mtjsnn/snn.hpp"

namespace mtjsnn {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat `key = value` configuration with a fixed key registry. Unknown
// keys are rejected; units are encoded in the key names.
class Config {
public:
    enum class Type { Double, Int, String };

    struct KeySpec {
        std::string key;
        Type type;
        std::string default_value;
        std::string doc;  // includes units
    };

    Config();  // registry defaults

    void load_file(const std::string& path);          // '#' comments, key = value
    void parse_line(const std::string& line, int line_no, const std::string& origin);
    void set(const std::string& key, const std::string& value);  // rejects unknown keys

    double get_double(const std::string& key) const;
    long get_int(const std::string& key) const;
    const std::string& get_string(const std::string& key) const;

    static const std::vector<KeySpec>& registry();

    // Assembled typed views; these validate and throw ConfigError naming
    // the offending key.
    DeviceParams device_params(double temp_k) const;
    CharacterizeOptions characterize_options() const;
    TrainHyper train_hyper() const;
    RunConfig run_config() const;

    // Throws ConfigError naming the key when its value is empty.
    const std::string& require_path(const std::string& key) const;

    int threads() const;

private:
    std::map<std::string, std::string> values_;
    const KeySpec& spec_for(const std::string& key) const;
    void validate_value(const KeySpec& spec, const std::string& value) const;
};

// Comma-separated list of doubles (used by the sweep sigma lists).
std::vector<double> parse_double_list(const std::string& text, const std::string& context);

}  // namespace mtjsnn
