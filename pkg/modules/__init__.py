"""
GLCM texture classification pipeline.
Imaging, co-occurrence features, Naive Bayes and SVM classifiers, evaluation
and runtime benchmarking.
"""
