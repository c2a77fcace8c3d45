// Reference out-of-process QA backend for the line-delimited JSON wire
// contract: one {"input_text", "n_samples"} request per line in, one
// {"answers": [...]} response per line out. Answers with argv[1] when given,
// otherwise with the last word of the input text.
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

int main(int argc, char** argv) {
    std::string fixed = argc > 1 ? argv[1] : "";
    std::string line;
    while (std::getline(std::cin, line)) {
        nlohmann::json req = nlohmann::json::parse(line, nullptr, false);
        if (req.is_discarded() || !req.contains("n_samples")) {
            std::cout << "{\"error\":\"bad request\"}\n" << std::flush;
            continue;
        }
        int n = req.value("n_samples", 0);
        std::string answer = fixed;
        if (answer.empty()) {
            std::string input = req.value("input_text", std::string());
            size_t end = input.find_last_not_of(" \t\r\n");
            if (end == std::string::npos) {
                answer = "empty";
            } else {
                size_t begin = input.find_last_of(" \t\r\n", end);
                answer = input.substr(begin + 1, end - begin);
            }
        }
        nlohmann::json resp{
            {"answers", std::vector<std::string>(static_cast<size_t>(std::max(0, n)), answer)}};
        std::cout << resp.dump() << "\n" << std::flush;
    }
    return 0;
}
