#include "sindympc/cli/app.hpp"

int main(int argc, char** argv)
{
    return sindympc::cli::run(argc, argv);
}
