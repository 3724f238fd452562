# Pairwise group-testing toolkit
