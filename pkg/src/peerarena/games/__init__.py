"""Rule engines. Importing a module registers its engines with the kernel."""
